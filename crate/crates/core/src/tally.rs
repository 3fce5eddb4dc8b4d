//! Win/loss/tie tallies over unmatched (all cross-arm pairs) or matched pairs.

use serde::{Deserialize, Serialize};

use crate::compare::{pair_verdict, Verdict};
use crate::error::{Error, Result};
use crate::outcome::{Arm, Dataset, Hierarchy, PatientRecord};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    Unmatched,
    Matched,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinStats {
    pub n_win: u64,
    pub n_loss: u64,
    pub n_tie: u64,
    pub n_pairs: u64,
    /// Wins plus losses decided at each hierarchy level.
    pub decided_at_level: Vec<u64>,
    pub pairing: Pairing,
}

impl WinStats {
    pub fn empty(levels: usize, pairing: Pairing) -> Self {
        Self { n_win: 0, n_loss: 0, n_tie: 0, n_pairs: 0, decided_at_level: vec![0; levels], pairing }
    }

    /// Builds a tally from raw counts with no level breakdown.
    pub fn from_counts(n_win: u64, n_loss: u64, n_tie: u64, pairing: Pairing) -> Self {
        Self { n_win, n_loss, n_tie, n_pairs: n_win + n_loss + n_tie, decided_at_level: vec![n_win + n_loss], pairing }
    }

    pub fn n_decided(&self) -> u64 {
        self.n_win + self.n_loss
    }

    pub fn tie_fraction(&self) -> f64 {
        if self.n_pairs == 0 {
            0.0
        } else {
            self.n_tie as f64 / self.n_pairs as f64
        }
    }

    fn record(&mut self, verdict: Verdict, level: Option<usize>) {
        self.n_pairs += 1;
        match verdict {
            Verdict::Win => self.n_win += 1,
            Verdict::Loss => self.n_loss += 1,
            Verdict::Tie => self.n_tie += 1,
        }
        if let Some(l) = level {
            self.decided_at_level[l] += 1;
        }
    }

    fn merge(&mut self, other: &WinStats) {
        self.n_win += other.n_win;
        self.n_loss += other.n_loss;
        self.n_tie += other.n_tie;
        self.n_pairs += other.n_pairs;
        for (a, b) in self.decided_at_level.iter_mut().zip(&other.decided_at_level) {
            *a += b;
        }
    }
}

/// Rows of at least this many treatment patients are tallied in parallel.
const PAR_MIN_ROWS: usize = 64;

fn split_arms(dataset: &Dataset) -> Result<(Vec<&PatientRecord>, Vec<&PatientRecord>)> {
    let t: Vec<_> = dataset.arm(Arm::Treatment).collect();
    let c: Vec<_> = dataset.arm(Arm::Control).collect();
    if t.is_empty() || c.is_empty() {
        return Err(Error::invalid(format!(
            "both arms need at least one patient (treatment {}, control {})",
            t.len(),
            c.len()
        )));
    }
    Ok((t, c))
}

/// Compares every treatment patient with every control patient.
pub fn tally_unmatched(dataset: &Dataset) -> Result<WinStats> {
    let (t, c) = split_arms(dataset)?;
    let h = &dataset.hierarchy;
    let rows = par::map_range_min(0..t.len(), PAR_MIN_ROWS, |i| {
        let mut row = WinStats::empty(h.len(), Pairing::Unmatched);
        for cj in &c {
            let r = pair_verdict(&t[i].values, &cj.values, h);
            row.record(r.verdict, r.deciding_level);
        }
        row
    });
    let mut total = WinStats::empty(h.len(), Pairing::Unmatched);
    for r in &rows {
        total.merge(r);
    }
    Ok(total)
}

/// Tallies externally supplied (treatment, control) pairs.
pub fn tally_matched(pairs: &[(PatientRecord, PatientRecord)], h: &Hierarchy) -> Result<WinStats> {
    if pairs.is_empty() {
        return Err(Error::invalid("matched tally needs at least one pair"));
    }
    let mut total = WinStats::empty(h.len(), Pairing::Matched);
    for (a, b) in pairs {
        a.conforms(h)?;
        b.conforms(h)?;
        let r = pair_verdict(&a.values, &b.values, h);
        total.record(r.verdict, r.deciding_level);
    }
    Ok(total)
}

/// Verdict of every (treatment, control) pair, kept for resampling.
#[derive(Debug, Clone)]
pub struct VerdictMatrix {
    n_t: usize,
    n_c: usize,
    /// Row-major, +1 win, −1 loss, 0 tie.
    cells: Vec<i8>,
}

impl VerdictMatrix {
    pub fn build(dataset: &Dataset) -> Result<Self> {
        let (t, c) = split_arms(dataset)?;
        let h = &dataset.hierarchy;
        let rows = par::map_range_min(0..t.len(), PAR_MIN_ROWS, |i| {
            c.iter()
                .map(|cj| match pair_verdict(&t[i].values, &cj.values, h).verdict {
                    Verdict::Win => 1i8,
                    Verdict::Loss => -1,
                    Verdict::Tie => 0,
                })
                .collect::<Vec<_>>()
        });
        Ok(Self { n_t: t.len(), n_c: c.len(), cells: rows.concat() })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_t, self.n_c)
    }

    /// (wins, losses, ties) when treatment patient `i` appears `w_t[i]` times
    /// and control patient `j` appears `w_c[j]` times.
    pub fn weighted_counts(&self, w_t: &[u32], w_c: &[u32]) -> (u64, u64, u64) {
        debug_assert_eq!(w_t.len(), self.n_t);
        debug_assert_eq!(w_c.len(), self.n_c);
        let (mut win, mut loss) = (0u64, 0u64);
        for (i, &wi) in w_t.iter().enumerate() {
            if wi == 0 {
                continue;
            }
            let row = &self.cells[i * self.n_c..(i + 1) * self.n_c];
            let (mut rw, mut rl) = (0u64, 0u64);
            for (&v, &wj) in row.iter().zip(w_c) {
                let wj = u64::from(wj);
                rw += wj * u64::from(v == 1);
                rl += wj * u64::from(v == -1);
            }
            win += u64::from(wi) * rw;
            loss += u64::from(wi) * rl;
        }
        let total_t: u64 = w_t.iter().map(|&w| u64::from(w)).sum();
        let total_c: u64 = w_c.iter().map(|&w| u64::from(w)).sum();
        (win, loss, total_t * total_c - win - loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{Direction, OutcomeKind, OutcomeSpec, Value};

    fn one_level() -> Hierarchy {
        Hierarchy::new(vec![OutcomeSpec::new("y", OutcomeKind::Continuous, Direction::LowerFavorable)]).unwrap()
    }

    fn ds(t: &[f64], c: &[f64]) -> Dataset {
        let mut p = Vec::new();
        for (i, &v) in t.iter().enumerate() {
            p.push(PatientRecord::new(format!("t{i}"), Arm::Treatment, vec![Value::Scalar(v)]));
        }
        for (i, &v) in c.iter().enumerate() {
            p.push(PatientRecord::new(format!("c{i}"), Arm::Control, vec![Value::Scalar(v)]));
        }
        Dataset::new(one_level(), p).unwrap()
    }

    #[test]
    fn two_enumerable_pairs() {
        let s = tally_unmatched(&ds(&[5.0, 1.0], &[3.0])).unwrap();
        assert_eq!((s.n_win, s.n_loss, s.n_tie, s.n_pairs), (1, 1, 0, 2));
        assert_eq!(s.pairing, Pairing::Unmatched);
    }

    #[test]
    fn identical_single_records() {
        let s = tally_unmatched(&ds(&[2.0], &[2.0])).unwrap();
        assert_eq!((s.n_win, s.n_loss, s.n_tie), (0, 0, 1));
        assert_eq!(s.decided_at_level, vec![0]);
    }

    #[test]
    fn empty_arm_is_an_error() {
        assert!(tally_unmatched(&ds(&[1.0], &[])).is_err());
        assert!(VerdictMatrix::build(&ds(&[], &[1.0])).is_err());
        assert!(tally_matched(&[], &one_level()).is_err());
    }

    #[test]
    fn matched_pairs() {
        let h = one_level();
        let rec = |arm, v| PatientRecord::new("x", arm, vec![Value::Scalar(v)]);
        let s = tally_matched(&[(rec(Arm::Treatment, 1.0), rec(Arm::Control, 2.0))], &h).unwrap();
        assert_eq!((s.n_win, s.n_pairs), (1, 1));
        assert_eq!(s.pairing, Pairing::Matched);
        let same: Vec<_> =
            (0..4).map(|i| (rec(Arm::Treatment, f64::from(i)), rec(Arm::Control, f64::from(i)))).collect();
        let s = tally_matched(&same, &h).unwrap();
        assert_eq!((s.n_tie, s.n_pairs), (4, 4));
    }

    #[test]
    fn unit_weights_reproduce_the_tally() {
        let d = ds(&[1.0, 4.0, 2.0, 2.0], &[3.0, 2.0, 0.5]);
        let s = tally_unmatched(&d).unwrap();
        let m = VerdictMatrix::build(&d).unwrap();
        assert_eq!(m.weighted_counts(&[1; 4], &[1; 3]), (s.n_win, s.n_loss, s.n_tie));
        // duplicating a patient duplicates its row
        let (w, l, t) = m.weighted_counts(&[2, 0, 0, 0], &[1, 1, 1]);
        assert_eq!((w, l, t), (4, 2, 0));
    }
}
