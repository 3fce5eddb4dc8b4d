//! Closed-form power, sample-size and precision calculators.
//!
//! `yu_*` use the approximate variance `Var(log WR) ≈ σ²/N` with
//! `σ² = 4(1+p_tie) / (3 p_t (1−p_t)(1−p_tie))`; `mao_*` use the standard rank
//! variance ξ₀² and the null win proportion W₀.

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::stats::kernels::{normal_cdf, z};

/// Which tail(s) a power formula uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    /// `1 − Φ(Z_{1−α/2} − log(WR)·√N/σ)`: two-sided critical value, one tail
    /// of the rejection region. Below 1 for `WR < 1` this is close to zero.
    #[default]
    TwoSided,
    /// Same form with `Z_{1−α}`.
    OneSided,
    /// Two-sided critical value applied to `|log WR|`, so `WR` and `1/WR`
    /// give the same power.
    Symmetric,
}

impl Sidedness {
    fn critical(self, alpha: f64) -> f64 {
        match self {
            Sidedness::OneSided => z(1.0 - alpha),
            _ => z(1.0 - alpha / 2.0),
        }
    }

    fn effect(self, log_wr: f64) -> f64 {
        match self {
            Sidedness::Symmetric => log_wr.abs(),
            _ => log_wr,
        }
    }
}

/// A total sample size before and after rounding to whole patients per arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSize {
    pub unrounded: f64,
    pub n_total: u64,
    pub n_treatment: u64,
    pub n_control: u64,
}

impl SampleSize {
    /// Rounds each arm up separately: `⌈N·p_t⌉` and `⌈N·(1−p_t)⌉`.
    pub fn round_up(unrounded: f64, p_t: f64) -> Result<Self> {
        if !unrounded.is_finite() || unrounded < 0.0 {
            return Err(Error::InfiniteSampleSize(format!("sample size {unrounded} is not finite")));
        }
        // guard against 66.000000000001-style representation noise
        let up = |x: f64| (x - 1e-9).ceil().max(1.0) as u64;
        let n_treatment = up(unrounded * p_t);
        let n_control = up(unrounded * (1.0 - p_t));
        Ok(Self { unrounded, n_total: n_treatment + n_control, n_treatment, n_control })
    }
}

fn check_tie(p_tie: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p_tie) {
        if p_tie >= 1.0 {
            return Err(Error::UnboundedVariance(format!("tie probability {p_tie} leaves no decided pairs")));
        }
        return Err(Error::invalid(format!("tie probability must lie in [0, 1), got {p_tie}")));
    }
    Ok(())
}

fn check_wr(wr: f64) -> Result<f64> {
    check_positive("wr", wr)?;
    Ok(wr.ln())
}

fn check_n(n_total: f64) -> Result<()> {
    if n_total.is_finite() && n_total >= 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("total sample size must be at least 2, got {n_total}")))
    }
}

pub fn yu_sigma_sq(p_t: f64, p_tie: f64) -> Result<f64> {
    check_open_unit("p_t", p_t)?;
    check_tie(p_tie)?;
    Ok(4.0 * (1.0 + p_tie) / (3.0 * p_t * (1.0 - p_t) * (1.0 - p_tie)))
}

pub fn yu_power(wr: f64, n_total: f64, p_t: f64, p_tie: f64, alpha: f64, sidedness: Sidedness) -> Result<f64> {
    let log_wr = check_wr(wr)?;
    check_n(n_total)?;
    check_open_unit("alpha", alpha)?;
    let sigma = yu_sigma_sq(p_t, p_tie)?.sqrt();
    let arg = sidedness.critical(alpha) - sidedness.effect(log_wr) * n_total.sqrt() / sigma;
    Ok(1.0 - normal_cdf(arg))
}

fn n_from_z(numerator_var: f64, zsum: f64, log_wr: f64) -> Result<f64> {
    if log_wr == 0.0 {
        return Err(Error::InfiniteSampleSize("WR = 1 has no finite sample size".into()));
    }
    Ok(numerator_var * zsum * zsum / (log_wr * log_wr))
}

pub fn yu_sample_size(
    wr: f64,
    power: f64,
    p_t: f64,
    p_tie: f64,
    alpha: f64,
    sidedness: Sidedness,
) -> Result<SampleSize> {
    let log_wr = check_wr(wr)?;
    check_open_unit("power", power)?;
    check_open_unit("alpha", alpha)?;
    let sigma_sq = yu_sigma_sq(p_t, p_tie)?;
    if sidedness == Sidedness::TwoSided && log_wr < 0.0 {
        return Err(Error::Infeasible(
            "the as-written power formula cannot reach the target for WR < 1; use the symmetric variant".into(),
        ));
    }
    let unrounded = n_from_z(sigma_sq, sidedness.critical(alpha) + z(power), log_wr)?;
    SampleSize::round_up(unrounded, p_t)
}

/// Total N giving an expected total Wald CI width `width` for log WR.
pub fn precision_sample_size(width: f64, p_t: f64, p_tie: f64, alpha: f64) -> Result<SampleSize> {
    check_positive("width", width)?;
    check_open_unit("alpha", alpha)?;
    let sigma_sq = yu_sigma_sq(p_t, p_tie)?;
    let zq = z(1.0 - alpha / 2.0);
    // 4 Z² σ² / W², i.e. 16 Z² (1+p_tie) / (3 p_t(1−p_t)(1−p_tie) W²)
    let unrounded = 4.0 * zq * zq * sigma_sq / (width * width);
    SampleSize::round_up(unrounded, p_t)
}

/// Expected total width `2 Z √(σ²/N)` of the Wald CI for log WR.
pub fn precision_width(n_total: f64, p_t: f64, p_tie: f64, alpha: f64) -> Result<f64> {
    check_n(n_total)?;
    check_open_unit("alpha", alpha)?;
    let sigma_sq = yu_sigma_sq(p_t, p_tie)?;
    Ok(2.0 * z(1.0 - alpha / 2.0) * (sigma_sq / n_total).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaoInputs {
    pub xi0_sq: f64,
    pub w0: f64,
    pub p_c: f64,
}

impl MaoInputs {
    fn validate(&self) -> Result<()> {
        check_positive("xi0_sq", self.xi0_sq)?;
        if !(self.w0 > 0.0 && self.w0 <= 1.0) {
            return Err(Error::invalid(format!("w0 must lie in (0, 1], got {}", self.w0)));
        }
        check_open_unit("p_c", self.p_c)
    }

    fn scale(&self) -> f64 {
        self.p_c * (1.0 - self.p_c) * self.w0 * self.w0 / self.xi0_sq
    }
}

/// `Φ(W₀·log(WR)·√(p_c(1−p_c)N)/ξ₀ − Z)`.
pub fn mao_power(inp: &MaoInputs, wr: f64, n_total: f64, alpha: f64, sidedness: Sidedness) -> Result<f64> {
    inp.validate()?;
    let log_wr = check_wr(wr)?;
    check_n(n_total)?;
    check_open_unit("alpha", alpha)?;
    let arg = sidedness.effect(log_wr) * (inp.scale() * n_total).sqrt() - sidedness.critical(alpha);
    Ok(normal_cdf(arg))
}

pub fn mao_sample_size(inp: &MaoInputs, wr: f64, power: f64, alpha: f64, sidedness: Sidedness) -> Result<SampleSize> {
    inp.validate()?;
    let log_wr = check_wr(wr)?;
    check_open_unit("power", power)?;
    check_open_unit("alpha", alpha)?;
    if sidedness == Sidedness::TwoSided && log_wr < 0.0 {
        return Err(Error::Infeasible(
            "the as-written power formula cannot reach the target for WR < 1; use the symmetric variant".into(),
        ));
    }
    let unrounded = n_from_z(1.0 / inp.scale(), sidedness.critical(alpha) + z(power), log_wr)?;
    SampleSize::round_up(unrounded, 1.0 - inp.p_c)
}

/// Plug-in ξ₀² and W₀ from a pilot sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PilotEstimate {
    pub xi0_sq: f64,
    pub w0: f64,
    /// Constant sample: ξ₀² = 0, so any power computed from it is zero.
    pub degenerate: bool,
}

/// `R̂(y_i) = (#{y_j > y_i} − #{y_j < y_i})/n`, `ξ₀² = mean R̂²`, and `W₀` the
/// proportion of ordered pairs `i ≠ j` with `y_j > y_i` (ties count as
/// neither win nor loss but stay in the denominator).
pub fn mao_xi0_from_pilot(sample: &[f64]) -> Result<PilotEstimate> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::invalid(format!("pilot sample needs at least 2 values, got {n}")));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("pilot sample contains non-finite values"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sum_sq = 0.0;
    let mut greater_total = 0u64;
    for &y in sample {
        let less = sorted.partition_point(|&v| v < y);
        let not_greater = sorted.partition_point(|&v| v <= y);
        let greater = n - not_greater;
        let r = (greater as f64 - less as f64) / n as f64;
        sum_sq += r * r;
        greater_total += greater as u64;
    }
    let xi0_sq = sum_sq / n as f64;
    Ok(PilotEstimate { xi0_sq, w0: greater_total as f64 / (n * (n - 1)) as f64, degenerate: xi0_sq == 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TieSensitivityRow {
    pub n_total: f64,
    pub wr: f64,
    pub p_tie: f64,
    pub power: f64,
}

/// `yu_power` over the Cartesian grid, one row per cell, ordered by N, then WR,
/// then tie probability.
pub fn tie_sensitivity_table(
    n_totals: &[f64],
    wrs: &[f64],
    p_ties: &[f64],
    p_t: f64,
    alpha: f64,
    sidedness: Sidedness,
) -> Result<Vec<TieSensitivityRow>> {
    if n_totals.is_empty() || wrs.is_empty() || p_ties.is_empty() {
        return Err(Error::invalid("tie sensitivity grids must be non-empty"));
    }
    let mut rows = Vec::with_capacity(n_totals.len() * wrs.len() * p_ties.len());
    for &n_total in n_totals {
        for &wr in wrs {
            for &p_tie in p_ties {
                rows.push(TieSensitivityRow {
                    n_total,
                    wr,
                    p_tie,
                    power: yu_power(wr, n_total, p_t, p_tie, alpha, sidedness)?,
                });
            }
        }
    }
    Ok(rows)
}
