use serde::{Deserialize, Serialize};

use super::kernels::{chi2_sf, ln_choose};
use crate::error::{Error, Result};

/// A 2×2 table of counts, rows = arms, columns = outcome levels:
///
/// ```text
///            level 1  level 2
/// row 1         a        b
/// row 2         c        d
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoByTwoTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl TwoByTwoTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        let t = Self { a, b, c, d };
        if t.total() == 0 {
            return Err(Error::invalid("2x2 table is empty"));
        }
        Ok(t)
    }

    /// Builds the table from per-arm success counts and arm sizes.
    pub fn from_arms(success_1: u64, n_1: u64, success_2: u64, n_2: u64) -> Result<Self> {
        if success_1 > n_1 || success_2 > n_2 {
            return Err(Error::invalid("success count exceeds arm size"));
        }
        Self::new(success_1, n_1 - success_1, success_2, n_2 - success_2)
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn row_margins(&self) -> (u64, u64) {
        (self.a + self.b, self.c + self.d)
    }

    pub fn col_margins(&self) -> (u64, u64) {
        (self.a + self.c, self.b + self.d)
    }

    pub fn has_zero_margin(&self) -> bool {
        let (r1, r2) = self.row_margins();
        let (c1, c2) = self.col_margins();
        r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0
    }
}

/// Two-sided Fisher exact test.
///
/// The p-value sums the conditional (hypergeometric) probabilities of every
/// table with the observed margins that is at most as probable as the observed
/// one. A relative slack of 1e-7 absorbs rounding in the comparison.
pub fn fisher_exact(t: &TwoByTwoTable) -> f64 {
    if t.has_zero_margin() {
        return 1.0;
    }
    let (r1, r2) = t.row_margins();
    let (c1, _) = t.col_margins();
    let n = t.total();
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let ln_denom = ln_choose(n, c1);
    let ln_p = |x: u64| ln_choose(r1, x) + ln_choose(r2, c1 - x) - ln_denom;
    let observed = ln_p(t.a);
    let cutoff = observed + (1.0f64 + 1e-7).ln();
    let p: f64 = (lo..=hi).map(ln_p).filter(|&l| l <= cutoff).map(f64::exp).sum();
    p.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub p_value: f64,
    /// A row or column margin is zero; the statistic is undefined and p = 1.
    pub degenerate: bool,
}

/// Pearson chi-square test of independence on one degree of freedom,
/// optionally with Yates' continuity correction.
pub fn chi_square_test(t: &TwoByTwoTable, continuity_correction: bool) -> ChiSquareResult {
    if t.has_zero_margin() {
        return ChiSquareResult { statistic: 0.0, p_value: 1.0, degenerate: true };
    }
    let (r1, r2) = t.row_margins();
    let (c1, c2) = t.col_margins();
    let n = t.total() as f64;
    let cross = (t.a as f64 * t.d as f64 - t.b as f64 * t.c as f64).abs();
    let cross = if continuity_correction { (cross - n / 2.0).max(0.0) } else { cross };
    let statistic = n * cross * cross / (r1 as f64 * r2 as f64 * c1 as f64 * c2 as f64);
    ChiSquareResult { statistic, p_value: chi2_sf(statistic, 1.0).expect("df = 1"), degenerate: false }
}
