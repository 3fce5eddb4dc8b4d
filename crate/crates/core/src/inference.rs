//! Win-ratio estimators and inference.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::yu_sigma_sq;
use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::outcome::Dataset;
use crate::par;
use crate::rng::{role, Substream};
use crate::stats::kernels::{normal_sf, z};
use crate::tally::{tally_unmatched, VerdictMatrix, WinStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InferenceMethod {
    WaldLog,
    WilsonBacktransform,
    WaldPhiBacktransform,
    YuApprox,
    Bootstrap,
}

impl InferenceMethod {
    pub fn label(self) -> &'static str {
        match self {
            InferenceMethod::WaldLog => "wald-log",
            InferenceMethod::WilsonBacktransform => "wilson-backtransform",
            InferenceMethod::WaldPhiBacktransform => "wald-phi-backtransform",
            InferenceMethod::YuApprox => "yu-approx",
            InferenceMethod::Bootstrap => "bootstrap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceResult {
    /// WR (or win odds) point estimate; may be infinite when flagged.
    pub estimate: f64,
    pub log_estimate: f64,
    pub se_log: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub method: InferenceMethod,
    /// Degenerate input (zero wins or losses, φ on the boundary, too many
    /// degenerate bootstrap replicates).
    pub flagged: bool,
    /// Bootstrap only: replicates with zero wins or zero losses.
    pub n_degenerate: Option<u64>,
}

impl InferenceResult {
    pub fn ci(&self) -> (f64, f64) {
        (self.ci_lower, self.ci_upper)
    }

    /// Whether the confidence interval excludes `value`.
    pub fn excludes(&self, value: f64) -> bool {
        self.ci_lower > value || self.ci_upper < value
    }
}

/// `n_win / n_loss`; `+∞` when there are wins but no losses.
pub fn win_ratio(s: &WinStats) -> Result<f64> {
    if s.n_decided() == 0 {
        return Err(Error::AllTies { n_pairs: s.n_pairs });
    }
    if s.n_loss == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(s.n_win as f64 / s.n_loss as f64)
}

/// Win odds: wins and losses each credited with half of the ties.
pub fn win_odds(s: &WinStats) -> Result<f64> {
    if s.n_pairs == 0 {
        return Err(Error::invalid("win odds need at least one pair"));
    }
    let num = s.n_win as f64 + 0.5 * s.n_tie as f64;
    let den = s.n_loss as f64 + 0.5 * s.n_tie as f64;
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Wald,
    #[default]
    Wilson,
}

/// φ_win = proportion of wins among decided pairs, with its CI and the WR
/// quantities derived from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiInference {
    pub phi: f64,
    pub var_phi: f64,
    pub phi_ci: (f64, f64),
    /// Delta-method variance of WR.
    pub var_wr: f64,
    /// Delta-method variance of log WR.
    pub var_log_wr: f64,
    /// WR inference with the CI back-transformed from `phi_ci`.
    pub result: InferenceResult,
}

fn odds(p: f64) -> f64 {
    if p >= 1.0 {
        f64::INFINITY
    } else {
        p / (1.0 - p)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    check_open_unit("alpha", alpha)
}

/// Inference on φ_win with the WR interval obtained through `h(φ) = φ/(1−φ)`.
pub fn infer_phi(s: &WinStats, alpha: f64, ci_method: CiMethod) -> Result<PhiInference> {
    check_alpha(alpha)?;
    if s.n_decided() == 0 {
        return Err(Error::AllTies { n_pairs: s.n_pairs });
    }
    let n = s.n_decided() as f64;
    let phi = s.n_win as f64 / n;
    let var_phi = phi * (1.0 - phi) / n;
    let zq = z(1.0 - alpha / 2.0);
    let boundary = phi == 0.0 || phi == 1.0;

    let (phi_ci, method) = match ci_method {
        CiMethod::Wald => {
            let hw = zq * var_phi.sqrt();
            ((phi - hw, phi + hw), InferenceMethod::WaldPhiBacktransform)
        }
        CiMethod::Wilson => {
            let z2 = zq * zq;
            let den = 1.0 + z2 / n;
            let centre = (phi + z2 / (2.0 * n)) / den;
            let hw = zq * (phi * (1.0 - phi) / n + z2 / (4.0 * n * n)).sqrt() / den;
            ((centre - hw, centre + hw), InferenceMethod::WilsonBacktransform)
        }
    };
    let phi_ci = (phi_ci.0.max(0.0), phi_ci.1.min(1.0));
    let var_wr = phi / ((1.0 - phi).powi(3) * n);
    let var_log_wr = 1.0 / (phi * (1.0 - phi) * n);
    let estimate = odds(phi);
    let log_estimate = estimate.ln();
    let se_log = var_log_wr.sqrt();
    let zstat = if boundary { log_estimate.signum() * f64::INFINITY } else { log_estimate / se_log };
    let p_value = if boundary { 0.0 } else { (2.0 * normal_sf(zstat.abs())).min(1.0) };
    Ok(PhiInference {
        phi,
        var_phi,
        phi_ci,
        var_wr,
        var_log_wr,
        result: InferenceResult {
            estimate,
            log_estimate,
            se_log,
            ci_lower: odds(phi_ci.0),
            ci_upper: odds(phi_ci.1),
            z: zstat,
            p_value,
            alpha,
            method,
            flagged: boundary && ci_method == CiMethod::Wald,
            n_degenerate: None,
        },
    })
}

fn wald_on_log(log_wr: f64, se_log: f64, wr0: f64, alpha: f64, method: InferenceMethod) -> InferenceResult {
    let zq = z(1.0 - alpha / 2.0);
    let zstat = (log_wr - wr0.ln()) / se_log;
    InferenceResult {
        estimate: log_wr.exp(),
        log_estimate: log_wr,
        se_log,
        ci_lower: (log_wr - zq * se_log).exp(),
        ci_upper: (log_wr + zq * se_log).exp(),
        z: zstat,
        p_value: (2.0 * normal_sf(zstat.abs())).min(1.0),
        alpha,
        method,
        flagged: false,
        n_degenerate: None,
    }
}

/// Count-based Wald test of `WR = wr0` on the log scale, with
/// `Var(log WR) = 1 / (φ(1−φ)(N_W + N_L))`. Valid for matched pairs, where
/// pairs are independent.
pub fn wald_test_log_wr(s: &WinStats, wr0: f64, alpha: f64) -> Result<InferenceResult> {
    check_alpha(alpha)?;
    check_positive("wr0", wr0)?;
    if s.n_win == 0 || s.n_loss == 0 {
        return Err(Error::DegenerateCounts { n_win: s.n_win, n_loss: s.n_loss });
    }
    let n = s.n_decided() as f64;
    let phi = s.n_win as f64 / n;
    let se = (1.0 / (phi * (1.0 - phi) * n)).sqrt();
    let log_wr = (s.n_win as f64 / s.n_loss as f64).ln();
    Ok(wald_on_log(log_wr, se, wr0, alpha, InferenceMethod::WaldLog))
}

/// Result for zero wins or zero losses: infinite log estimate, an interval
/// collapsed onto the boundary, and `p = 0`.
fn degenerate_result(s: &WinStats, alpha: f64, method: InferenceMethod, se_log: f64) -> InferenceResult {
    let estimate = if s.n_loss == 0 { f64::INFINITY } else { 0.0 };
    InferenceResult {
        estimate,
        log_estimate: estimate.ln(),
        se_log,
        ci_lower: estimate,
        ci_upper: estimate,
        z: estimate.ln().signum() * f64::INFINITY,
        p_value: 0.0,
        alpha,
        method,
        flagged: true,
        n_degenerate: None,
    }
}

/// Wald test of `WR = wr0` using the approximate variance
/// `Var(log WR) ≈ σ²(p_t, p_tie) / N`, with the allocation and tie proportion
/// plugged in from the data. This is the default unmatched inference.
///
/// Zero wins or losses give a flagged result rather than an error so that
/// simulation tallies never abort.
pub fn yu_test(s: &WinStats, n_t: usize, n_c: usize, wr0: f64, alpha: f64) -> Result<InferenceResult> {
    check_alpha(alpha)?;
    check_positive("wr0", wr0)?;
    if n_t == 0 || n_c == 0 {
        return Err(Error::invalid("Yu test needs both arms non-empty"));
    }
    if s.n_decided() == 0 {
        return Err(Error::AllTies { n_pairs: s.n_pairs });
    }
    let n_total = (n_t + n_c) as f64;
    let sigma_sq = yu_sigma_sq(n_t as f64 / n_total, s.tie_fraction())?;
    let se = (sigma_sq / n_total).sqrt();
    if s.n_win == 0 || s.n_loss == 0 {
        return Ok(degenerate_result(s, alpha, InferenceMethod::YuApprox, se));
    }
    let log_wr = (s.n_win as f64 / s.n_loss as f64).ln();
    Ok(wald_on_log(log_wr, se, wr0, alpha, InferenceMethod::YuApprox))
}

/// Fraction of degenerate replicates above which a bootstrap result is flagged.
pub const BOOTSTRAP_DEGENERATE_LIMIT: f64 = 0.20;

/// Percentile bootstrap for the unmatched WR: patients are resampled with
/// replacement within each arm and the WR recomputed per replicate.
///
/// Replicate `r` draws from substream `(BOOTSTRAP, r)` of `seed`, so results
/// are identical for any thread count.
pub fn bootstrap_wr(dataset: &Dataset, b: usize, alpha: f64, seed: u64) -> Result<InferenceResult> {
    let matrix = VerdictMatrix::build(dataset)?;
    let point = tally_unmatched(dataset)?;
    bootstrap_matrix(&matrix, &point, b, alpha, &Substream::new(seed))
}

/// Bootstrap on a precomputed verdict matrix; `point` must be its unit-weight
/// tally.
pub fn bootstrap_matrix(
    matrix: &VerdictMatrix,
    point: &WinStats,
    b: usize,
    alpha: f64,
    stream: &Substream,
) -> Result<InferenceResult> {
    check_alpha(alpha)?;
    if b < 2 {
        return Err(Error::invalid(format!("bootstrap needs at least 2 replicates, got {b}")));
    }
    let estimate = win_ratio(point)?;
    let (n_t, n_c) = matrix.shape();

    let replicates: Vec<(f64, bool)> = par::map_range_min(0..b, 16, |r| {
        let mut rng = stream.rng(&[role::BOOTSTRAP, r as u64]);
        let mut w_t = vec![0u32; n_t];
        let mut w_c = vec![0u32; n_c];
        for _ in 0..n_t {
            w_t[rng.random_range(0..n_t)] += 1;
        }
        for _ in 0..n_c {
            w_c[rng.random_range(0..n_c)] += 1;
        }
        let (win, loss, _) = matrix.weighted_counts(&w_t, &w_c);
        let degenerate = win == 0 || loss == 0;
        let log_wr = if win == 0 && loss == 0 { f64::NAN } else { (win as f64 / loss as f64).ln() };
        (log_wr, degenerate)
    });

    let n_degenerate = replicates.iter().filter(|r| r.1).count() as u64;
    let mut logs: Vec<f64> = replicates.iter().map(|r| r.0).filter(|v| !v.is_nan()).collect();
    if logs.is_empty() {
        return Err(Error::AllTies { n_pairs: point.n_pairs });
    }
    logs.sort_by(f64::total_cmp);
    let m = logs.len();
    let rank = |q: f64| ((q * m as f64).ceil() as usize).clamp(1, m) - 1;
    let lo = logs[rank(alpha / 2.0)];
    let hi = logs[rank(1.0 - alpha / 2.0)];

    let below = logs.iter().filter(|&&v| v <= 0.0).count() as f64 / m as f64;
    let above = logs.iter().filter(|&&v| v >= 0.0).count() as f64 / m as f64;
    let p_value = (2.0 * below.min(above)).min(1.0);

    let finite: Vec<f64> = logs.iter().copied().filter(|v| v.is_finite()).collect();
    let se_log = if finite.len() >= 2 {
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        (finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (finite.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    let log_estimate = estimate.ln();
    Ok(InferenceResult {
        estimate,
        log_estimate,
        se_log,
        ci_lower: lo.exp(),
        ci_upper: hi.exp(),
        z: log_estimate / se_log,
        p_value,
        alpha,
        method: InferenceMethod::Bootstrap,
        flagged: n_degenerate as f64 > BOOTSTRAP_DEGENERATE_LIMIT * b as f64 || !estimate.is_finite(),
        n_degenerate: Some(n_degenerate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{Arm, Direction, Hierarchy, OutcomeKind, OutcomeSpec, PatientRecord, Value};
    use crate::tally::Pairing;

    fn counts(w: u64, l: u64, t: u64) -> WinStats {
        WinStats::from_counts(w, l, t, Pairing::Unmatched)
    }

    #[test]
    fn win_ratio_cases() {
        assert_eq!(win_ratio(&counts(1, 1, 0)).unwrap(), 1.0);
        assert!(win_ratio(&counts(2, 0, 0)).unwrap().is_infinite());
        assert!(matches!(win_ratio(&counts(0, 0, 3)), Err(Error::AllTies { n_pairs: 3 })));
    }

    #[test]
    fn win_odds_cases() {
        assert!((win_odds(&counts(2, 1, 1)).unwrap() - 2.5 / 1.5).abs() < 1e-15);
        assert_eq!(win_odds(&counts(0, 0, 5)).unwrap(), 1.0);
        for t in 0..5 {
            assert_eq!(win_odds(&counts(3, 3, t)).unwrap(), 1.0);
        }
        assert!(win_odds(&counts(3, 0, 0)).unwrap().is_infinite());
        assert_eq!(win_odds(&counts(7, 3, 0)).unwrap(), win_ratio(&counts(7, 3, 0)).unwrap());
    }

    #[test]
    fn phi_symmetric_case() {
        let r = infer_phi(&counts(50, 50, 0), 0.05, CiMethod::Wald).unwrap();
        assert_eq!(r.phi, 0.5);
        assert!((r.var_phi - 0.0025).abs() < 1e-15);
        let (lo, hi) = r.result.ci();
        assert!((lo.ln() + hi.ln()).abs() < 1e-12);
    }

    #[test]
    fn phi_boundary() {
        let w = infer_phi(&counts(100, 0, 0), 0.05, CiMethod::Wald).unwrap();
        assert!(w.result.flagged);
        let wi = infer_phi(&counts(100, 0, 0), 0.05, CiMethod::Wilson).unwrap();
        assert!(!wi.result.flagged);
        assert!(wi.phi_ci.0 > 0.9 && wi.phi_ci.0 < 1.0);
        assert!(wi.result.ci_lower.is_finite() && wi.result.ci_lower > 1.0);
    }

    #[test]
    fn phi_60_40_matches_textbook_formulas() {
        // 40-digit evaluations of the Wald and Wilson intervals
        let w = infer_phi(&counts(60, 40, 0), 0.05, CiMethod::Wald).unwrap();
        assert!((w.phi_ci.0 - 0.503_981_766_472_893_8).abs() < 1e-10);
        assert!((w.phi_ci.1 - 0.696_018_233_527_106_2).abs() < 1e-10);
        assert!((w.result.ci_lower - 1.016_054_919_774_138_6).abs() < 1e-10);
        assert!((w.result.ci_upper - 2.289_670_994_425_155_6).abs() < 1e-10);
        let s = infer_phi(&counts(60, 40, 0), 0.05, CiMethod::Wilson).unwrap();
        assert!((s.phi_ci.0 - 0.502_002_586_791_061_8).abs() < 1e-10);
        assert!((s.phi_ci.1 - 0.690_598_713_567_541_1).abs() < 1e-10);
        assert!((s.result.ci_lower - 1.008_042_559_009_123).abs() < 1e-10);
        assert!((s.result.ci_upper - 2.232_048_617_284_259_6).abs() < 1e-10);
    }

    #[test]
    fn delta_method_identities() {
        for (w, l) in [(60u64, 40u64), (7, 13), (999, 1)] {
            let r = infer_phi(&counts(w, l, 5), 0.05, CiMethod::Wald).unwrap();
            let n = (w + l) as f64;
            let phi = w as f64 / n;
            let h_prime = 1.0 / (1.0 - phi).powi(2);
            assert!((r.var_wr - h_prime * h_prime * r.var_phi).abs() <= 1e-12 * r.var_wr.max(1.0));
            let g_prime = 1.0 / (phi * (1.0 - phi));
            assert!((r.var_log_wr - g_prime * g_prime * r.var_phi).abs() <= 1e-12 * r.var_log_wr.max(1.0));
        }
    }

    #[test]
    fn wald_log_cases() {
        let r = wald_test_log_wr(&counts(30, 30, 2), 1.0, 0.05).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = wald_test_log_wr(&counts(60, 40, 0), 1.0, 0.05).unwrap();
        assert!((r.se_log - 0.204_124_145_231_931_5).abs() < 1e-12);
        assert!((r.z - 1.986_365_246_734_842).abs() < 1e-12);
        assert!((r.p_value - 0.046_992_782_617_713_94).abs() < 1e-10);
        assert!((r.ci_lower - 1.005_403_682_588_093_7).abs() < 1e-10);
        let doubled = wald_test_log_wr(&counts(120, 80, 0), 1.0, 0.05).unwrap();
        assert!((r.se_log.powi(2) / doubled.se_log.powi(2) - 2.0).abs() < 1e-12);
        assert!(matches!(wald_test_log_wr(&counts(5, 0, 1), 1.0, 0.05), Err(Error::DegenerateCounts { .. })));
    }

    #[test]
    fn yu_test_uses_plug_in_ties() {
        let s = counts(60, 40, 0);
        let r = yu_test(&s, 5, 20, 1.0, 0.05).unwrap();
        let sigma_sq: f64 = 4.0 / (3.0 * 0.2 * 0.8);
        assert!((r.se_log - (sigma_sq / 25.0).sqrt()).abs() < 1e-14);
        let d = yu_test(&counts(4, 0, 0), 2, 2, 1.0, 0.05).unwrap();
        assert!(d.flagged && d.excludes(1.0) && d.p_value == 0.0);
    }

    fn constant_dataset() -> Dataset {
        let h =
            Hierarchy::new(vec![OutcomeSpec::new("y", OutcomeKind::Continuous, Direction::LowerFavorable)]).unwrap();
        let mut p = Vec::new();
        for i in 0..6 {
            p.push(PatientRecord::new(format!("t{i}"), Arm::Treatment, vec![Value::Scalar(1.0)]));
            p.push(PatientRecord::new(format!("c{i}"), Arm::Control, vec![Value::Scalar(2.0 + f64::from(i % 2))]));
        }
        // one treatment patient worse than every control so losses exist
        p.push(PatientRecord::new("t-bad", Arm::Treatment, vec![Value::Scalar(9.0)]));
        Dataset::new(h, p).unwrap()
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let d = constant_dataset();
        let a = bootstrap_wr(&d, 200, 0.05, 11).unwrap();
        let b = crate::par::with_threads(1, || bootstrap_wr(&d, 200, 0.05, 11).unwrap());
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        // 36 wins (six good treatment patients x six controls) and 6 losses
        assert_eq!(a.estimate, 6.0);
    }

    #[test]
    fn bootstrap_within_arm_identical_patients() {
        let h =
            Hierarchy::new(vec![OutcomeSpec::new("y", OutcomeKind::Continuous, Direction::LowerFavorable)]).unwrap();
        let mut p = Vec::new();
        for i in 0..4 {
            p.push(PatientRecord::new(format!("t{i}"), Arm::Treatment, vec![Value::Scalar(1.0)]));
            p.push(PatientRecord::new(format!("c{i}"), Arm::Control, vec![Value::Scalar(2.0)]));
        }
        let d = Dataset::new(h, p).unwrap();
        let r = bootstrap_wr(&d, 100, 0.05, 3).unwrap();
        // every replicate has zero losses: all equal the (infinite) point estimate
        assert!(r.estimate.is_infinite() && r.flagged);
        assert_eq!(r.ci_lower, r.ci_upper);
        assert_eq!(r.n_degenerate, Some(100));
    }

    #[test]
    fn bootstrap_rejects_small_b() {
        assert!(bootstrap_wr(&constant_dataset(), 1, 0.05, 0).is_err());
    }
}
