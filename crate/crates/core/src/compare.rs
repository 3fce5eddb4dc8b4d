//! Hierarchical pairwise comparison of a treatment and a control patient.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::outcome::{Direction, Hierarchy, OutcomeSpec, PatientRecord, Value};

/// Outcome of a comparison from the treatment patient's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Win,
    Loss,
    Tie,
}

impl Verdict {
    pub fn flipped(self) -> Verdict {
        match self {
            Verdict::Win => Verdict::Loss,
            Verdict::Loss => Verdict::Win,
            Verdict::Tie => Verdict::Tie,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub verdict: Verdict,
    /// Zero-based index of the level that decided the pair; `None` iff tie.
    pub deciding_level: Option<usize>,
}

impl ComparisonResult {
    pub const TIE: ComparisonResult = ComparisonResult { verdict: Verdict::Tie, deciding_level: None };
}

/// Compares treatment value `a` with control value `b` on one level.
///
/// Scalars (lower-favorable): win iff `b - a > margin`, loss iff
/// `a - b > margin`, otherwise tie; mirrored for higher-favorable.
///
/// Time-to-event (later favorable): win iff the control event is observed at
/// `t_C` and the treatment is still under observation after `t_C + margin`;
/// loss symmetrically. Both censored, equal times, and censoring before the
/// other's event are ties because the pair is only comparable while neither
/// patient is censored.
pub fn compare_at_level(a: &Value, b: &Value, spec: &OutcomeSpec) -> Result<Verdict> {
    a.conforms(spec)?;
    b.conforms(spec)?;
    Ok(level_verdict(a, b, spec))
}

/// [`compare_at_level`] without validation, for data already checked by
/// [`crate::Dataset::new`].
#[inline]
pub(crate) fn level_verdict(a: &Value, b: &Value, spec: &OutcomeSpec) -> Verdict {
    let m = spec.margin;
    match (*a, *b) {
        (Value::Scalar(x), Value::Scalar(y)) => {
            let (better, worse) = match spec.direction {
                Direction::LowerFavorable => (y - x, x - y),
                Direction::HigherFavorable => (x - y, y - x),
            };
            if better > m {
                Verdict::Win
            } else if worse > m {
                Verdict::Loss
            } else {
                Verdict::Tie
            }
        }
        (Value::Event { time: ta, event: ea }, Value::Event { time: tb, event: eb }) => {
            // Who had the earlier observed event, and did the other outlast it?
            let a_outlasts = eb && ta > tb + m;
            let b_outlasts = ea && tb > ta + m;
            let (a_better, b_better) = match spec.direction {
                Direction::HigherFavorable => (a_outlasts, b_outlasts),
                Direction::LowerFavorable => (b_outlasts, a_outlasts),
            };
            if a_better {
                Verdict::Win
            } else if b_better {
                Verdict::Loss
            } else {
                Verdict::Tie
            }
        }
        // Mixed shapes are rejected by validation.
        _ => Verdict::Tie,
    }
}

/// Walks the hierarchy until a level yields a win or a loss.
pub fn compare_pair(a: &PatientRecord, b: &PatientRecord, h: &Hierarchy) -> Result<ComparisonResult> {
    a.conforms(h)?;
    b.conforms(h)?;
    Ok(pair_verdict(&a.values, &b.values, h))
}

#[inline]
pub(crate) fn pair_verdict(a: &[Value], b: &[Value], h: &Hierarchy) -> ComparisonResult {
    for (level, ((va, vb), spec)) in a.iter().zip(b).zip(h.levels()).enumerate() {
        match level_verdict(va, vb, spec) {
            Verdict::Tie => continue,
            verdict => return ComparisonResult { verdict, deciding_level: Some(level) },
        }
    }
    ComparisonResult::TIE
}
