//! Special functions and distribution kernels.
//!
//! Everything is built on `ln_gamma` and the regularized incomplete gamma and
//! beta functions (series plus modified-Lentz continued fractions, internal
//! tolerance 1e-15). The normal quantile uses Wichura's AS 241.

#![allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping, clippy::neg_cmp_op_on_partial_ord)]

use rand::Rng;

use crate::error::{Error, Result};

const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 20_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin();
        return (std::f64::consts::PI / s.abs()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        gamma_q(0.5, x * x)
    } else {
        1.0 + gamma_p(0.5, x * x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survival function `1 - Φ(x)`, accurate in the upper tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile `Φ⁻¹(p)` (Wichura, AS 241).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::invalid(format!("probability must lie in [0, 1], got {p}")));
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.080_928_730_122_7 + 33_430.575_583_588_128) * r + 67_265.770_927_008_7) * r
            + 45_921.953_931_549_87)
            * r
            + 13_731.693_765_509_461)
            * r
            + 1_971.590_950_306_551_4)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((r * 5226.495_278_852_546 + 28_729.085_735_721_943) * r + 39_307.895_800_092_71) * r
            + 21_213.794_301_586_597)
            * r
            + 5_394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return Ok(q * num / den);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((r * 1.050_750_071_644_416_8e-9 + 5.475_938_084_995_345e-4) * r + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_07)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num =
            ((((((r * 2.010_334_399_292_288e-7 + 2.711_555_568_743_487_6e-5) * r + 0.001_242_660_947_388_078_4) * r
                + 0.026_532_189_526_576_124)
                * r
                + 0.296_560_571_828_504_9)
                * r
                + 1.784_826_539_917_291_3)
                * r
                + 5.463_784_911_164_114)
                * r
                + 6.657_904_643_501_103;
        let den =
            ((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r + 1.846_318_317_510_054_8e-5) * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_887_9)
                * r
                + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -val } else { val })
}

/// `Φ⁻¹(p)` for a `p` the caller has already validated.
pub(crate) fn z(p: f64) -> f64 {
    normal_quantile(p).expect("probability validated by caller")
}

/// Student t CDF with `df > 0` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) || t.is_nan() {
        return Err(Error::invalid(format!("t CDF needs df > 0 and finite t, got df={df}, t={t}")));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let half_tail = 0.5 * beta_inc(0.5 * df, 0.5, df / (df + t * t));
    Ok(if t > 0.0 { 1.0 - half_tail } else { half_tail })
}

/// Two-sided tail probability `P(|T| ≥ |t|)`.
pub fn t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) || t.is_nan() {
        return Err(Error::invalid(format!("t tail needs df > 0 and finite t, got df={df}, t={t}")));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    Ok(beta_inc(0.5 * df, 0.5, df / (df + t * t)).clamp(0.0, 1.0))
}

/// Chi-square CDF with `k > 0` degrees of freedom.
pub fn chi2_cdf(x: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) || x.is_nan() {
        return Err(Error::invalid(format!("chi-square CDF needs k > 0, got k={k}, x={x}")));
    }
    Ok(gamma_p(0.5 * k, 0.5 * x.max(0.0)))
}

/// Chi-square upper tail `1 - F(x)`.
pub fn chi2_sf(x: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) || x.is_nan() {
        return Err(Error::invalid(format!("chi-square tail needs k > 0, got k={k}, x={x}")));
    }
    Ok(gamma_q(0.5 * k, 0.5 * x.max(0.0)))
}

/// Hypergeometric PMF: probability of `k` successes in `n` draws without
/// replacement from a population of `total` containing `successes`.
pub fn hypergeom_pmf(k: u64, total: u64, successes: u64, n: u64) -> Result<f64> {
    if successes > total || n > total {
        return Err(Error::invalid(format!("hypergeometric parameters out of range: N={total}, K={successes}, n={n}")));
    }
    let lo = n.saturating_sub(total - successes);
    let hi = n.min(successes);
    if k < lo || k > hi {
        return Ok(0.0);
    }
    Ok((ln_choose(successes, k) + ln_choose(total - successes, n - k) - ln_choose(total, n)).exp())
}

/// Fisher's noncentral hypergeometric distribution.
///
/// Counts red balls among `draws` taken from an urn holding `red` red and
/// `white` white balls, where each red ball carries odds weight `omega`
/// relative to a white one.
#[derive(Debug, Clone)]
pub struct FisherNoncentralHypergeometric {
    lo: u64,
    pmf: Vec<f64>,
}

impl FisherNoncentralHypergeometric {
    pub fn new(red: u64, white: u64, draws: u64, omega: f64) -> Result<Self> {
        if draws > red + white {
            return Err(Error::invalid(format!("cannot draw {draws} from an urn of {}", red + white)));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::invalid(format!("odds ratio must be positive, got {omega}")));
        }
        let (lo, hi) = Self::support_of(red, white, draws);
        let ln_omega = omega.ln();
        let logs: Vec<f64> =
            (lo..=hi).map(|x| ln_choose(red, x) + ln_choose(white, draws - x) + x as f64 * ln_omega).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut pmf: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= total);
        Ok(Self { lo, pmf })
    }

    pub fn support_of(red: u64, white: u64, draws: u64) -> (u64, u64) {
        (draws.saturating_sub(white), draws.min(red))
    }

    pub fn support(&self) -> (u64, u64) {
        (self.lo, self.lo + self.pmf.len() as u64 - 1)
    }

    pub fn pmf(&self, x: u64) -> f64 {
        if x < self.lo {
            return 0.0;
        }
        self.pmf.get((x - self.lo) as usize).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(i, p)| (self.lo + i as u64) as f64 * p).sum()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                return self.lo + i as u64;
            }
        }
        self.lo + self.pmf.len() as u64 - 1
    }
}
