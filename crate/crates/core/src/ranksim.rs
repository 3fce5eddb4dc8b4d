//! Rank-based power simulation.
//!
//! Each iteration draws the number `X` of treatment patients among the best
//! `⌈N/2⌉` ranks from a Fisher noncentral hypergeometric distribution whose
//! odds ω makes `E[X]/n_t = φ_win`, places the treatment ranks uniformly within
//! the two halves, and decides by a percentile bootstrap CI for the WR.
//! Rank 1 is the best outcome.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::inference::bootstrap_matrix;
use crate::outcome::{Arm, Dataset, Direction, Hierarchy, OutcomeKind, OutcomeSpec, PatientRecord, Value};
use crate::par;
use crate::rng::{role, Substream, DEFAULT_SEED};
use crate::sim::PowerResult;
use crate::stats::FisherNoncentralHypergeometric;
use crate::tally::{tally_unmatched, VerdictMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankSimConfig {
    pub n_t: usize,
    pub n_c: usize,
    /// One or two levels.
    pub phi_win: Vec<f64>,
    pub tie_prob_level1: f64,
    pub n_bootstrap: usize,
    pub n_iterations: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for RankSimConfig {
    fn default() -> Self {
        Self {
            n_t: 50,
            n_c: 50,
            phi_win: vec![0.5],
            tie_prob_level1: 0.0,
            n_bootstrap: 500,
            n_iterations: 1000,
            alpha: 0.05,
            seed: DEFAULT_SEED,
        }
    }
}

impl RankSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_c == 0 {
            return Err(Error::invalid("rank simulation needs both arms non-empty"));
        }
        if self.phi_win.is_empty() || self.phi_win.len() > 2 {
            return Err(Error::invalid(format!("rank simulation supports 1 or 2 levels, got {}", self.phi_win.len())));
        }
        for &p in &self.phi_win {
            check_open_unit("phi_win", p)?;
        }
        if !(0.0..1.0).contains(&self.tie_prob_level1) {
            return Err(Error::invalid(format!(
                "level-1 tie probability must lie in [0, 1), got {}",
                self.tie_prob_level1
            )));
        }
        if self.n_bootstrap < 2 || self.n_iterations == 0 {
            return Err(Error::invalid("bootstrap replicates must be >= 2 and iterations >= 1"));
        }
        check_open_unit("alpha", self.alpha)
    }

    fn hierarchy(&self) -> Hierarchy {
        let levels = (1..=self.phi_win.len())
            .map(|l| OutcomeSpec::new(format!("rank{l}"), OutcomeKind::Continuous, Direction::LowerFavorable))
            .collect();
        Hierarchy::new(levels).expect("rank hierarchy is valid")
    }
}

fn top_half(n_t: usize, n_c: usize) -> usize {
    (n_t + n_c).div_ceil(2)
}

fn rank_distribution(n_t: usize, n_c: usize, omega: f64) -> Result<FisherNoncentralHypergeometric> {
    FisherNoncentralHypergeometric::new(n_t as u64, n_c as u64, top_half(n_t, n_c) as u64, omega)
}

/// Odds ω with `E[X]/n_t = phi_win`, found by bisection on `log ω`.
pub fn solve_omega(phi_win: f64, n_t: usize, n_c: usize) -> Result<f64> {
    check_open_unit("phi_win", phi_win)?;
    if n_t == 0 || n_c == 0 {
        return Err(Error::invalid("both arms need at least one patient"));
    }
    let (lo_x, hi_x) = FisherNoncentralHypergeometric::support_of(n_t as u64, n_c as u64, top_half(n_t, n_c) as u64);
    let target = phi_win * n_t as f64;
    if target <= lo_x as f64 || target >= hi_x as f64 {
        return Err(Error::Infeasible(format!(
            "phi_win {phi_win} needs E[X] = {target}, outside the open support ({lo_x}, {hi_x})"
        )));
    }
    let mean_share =
        |log_omega: f64| -> Result<f64> { Ok(rank_distribution(n_t, n_c, log_omega.exp())?.mean() / n_t as f64) };
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = mean_share(mid)?;
        if (m - phi_win).abs() < 1e-12 {
            return Ok(mid.exp());
        }
        if m < phi_win {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega = (0.5 * (lo + hi)).exp();
    if (mean_share(omega.ln())? - phi_win).abs() > 1e-8 {
        return Err(Error::Infeasible(format!("no odds ratio reaches phi_win {phi_win}")));
    }
    Ok(omega)
}

/// Treatment and control ranks for one level.
pub fn draw_ranks<R: Rng + ?Sized>(
    dist: &FisherNoncentralHypergeometric,
    n_t: usize,
    n_c: usize,
    tie_prob: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let n = n_t + n_c;
    let top = top_half(n_t, n_c);
    let x = dist.sample(rng) as usize;
    let mut is_treatment = vec![false; n];
    for i in sample(rng, top, x) {
        is_treatment[i] = true;
    }
    for i in sample(rng, n - top, n_t - x) {
        is_treatment[top + i] = true;
    }
    let mut rank: Vec<f64> = (1..=n).map(|r| r as f64).collect();
    let pairs = n / 2;
    let k = (tie_prob * pairs as f64).round() as usize;
    for p in sample(rng, pairs, k) {
        rank[2 * p + 1] = rank[2 * p];
    }
    let mut t = Vec::with_capacity(n_t);
    let mut c = Vec::with_capacity(n_c);
    for (r, treat) in rank.into_iter().zip(is_treatment) {
        if treat {
            t.push(r);
        } else {
            c.push(r);
        }
    }
    (t, c)
}

struct Prepared {
    dists: Vec<FisherNoncentralHypergeometric>,
    hierarchy: Hierarchy,
}

fn prepare(cfg: &RankSimConfig) -> Result<Prepared> {
    cfg.validate()?;
    let dists = cfg
        .phi_win
        .iter()
        .map(|&phi| rank_distribution(cfg.n_t, cfg.n_c, solve_omega(phi, cfg.n_t, cfg.n_c)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared { dists, hierarchy: cfg.hierarchy() })
}

fn trial<R: Rng + ?Sized>(cfg: &RankSimConfig, prep: &Prepared, rng: &mut R) -> Result<Dataset> {
    let mut t_vals = vec![Vec::with_capacity(prep.dists.len()); cfg.n_t];
    let mut c_vals = vec![Vec::with_capacity(prep.dists.len()); cfg.n_c];
    for (level, dist) in prep.dists.iter().enumerate() {
        let tie = if level == 0 { cfg.tie_prob_level1 } else { 0.0 };
        let (t, c) = draw_ranks(dist, cfg.n_t, cfg.n_c, tie, rng);
        for (v, r) in t_vals.iter_mut().zip(t) {
            v.push(Value::Scalar(r));
        }
        for (v, r) in c_vals.iter_mut().zip(c) {
            v.push(Value::Scalar(r));
        }
    }
    let patients = t_vals
        .into_iter()
        .enumerate()
        .map(|(i, v)| PatientRecord::new(format!("T{}", i + 1), Arm::Treatment, v))
        .chain(c_vals.into_iter().enumerate().map(|(i, v)| PatientRecord::new(format!("C{}", i + 1), Arm::Control, v)))
        .collect();
    Dataset::new(prep.hierarchy.clone(), patients)
}

/// One simulated trial: rank columns `rank1` (and `rank2`), lower is better.
pub fn simulate_rank_trial<R: Rng + ?Sized>(cfg: &RankSimConfig, rng: &mut R) -> Result<Dataset> {
    trial(cfg, &prepare(cfg)?, rng)
}

/// Bootstrap-decided power. Iteration `i` uses substream `i` of the seed for
/// the ranks and its own child substream for the bootstrap.
pub fn ranksim_power(cfg: &RankSimConfig) -> Result<PowerResult> {
    let prep = prepare(cfg)?;
    let root = Substream::new(cfg.seed);
    let outcomes = par::map_range(0..cfg.n_iterations, |i| -> Result<(bool, bool)> {
        let mut rng = root.rng(&[role::RANKS, i as u64]);
        let data = trial(cfg, &prep, &mut rng)?;
        let point = tally_unmatched(&data)?;
        let matrix = VerdictMatrix::build(&data)?;
        match bootstrap_matrix(&matrix, &point, cfg.n_bootstrap, cfg.alpha, &root.child(&[i as u64])) {
            Ok(r) => Ok((r.excludes(1.0), r.flagged)),
            Err(Error::AllTies { .. }) => Ok((false, true)),
            Err(e) => Err(e),
        }
    });
    let mut rejections = 0u64;
    let mut degenerate = 0u64;
    for o in outcomes {
        let (reject, flagged) = o?;
        rejections += u64::from(reject);
        degenerate += u64::from(flagged);
    }
    Ok(PowerResult::new(rejections, cfg.n_iterations as u64, degenerate))
}
