use serde::{Deserialize, Serialize};

use super::kernels::t_two_sided_p;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TTestVariant {
    #[default]
    Welch,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    /// Set when both samples have zero variance, so the statistic is 0 or ±∞.
    pub degenerate: bool,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Two-sided two-sample t test of `mean(x) = mean(y)`.
pub fn t_test(x: &[f64], y: &[f64], variant: TTestVariant) -> Result<TTestResult> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::invalid(format!(
            "t test needs at least two values per sample, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("t test input contains a non-finite value"));
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mx, vx) = mean_var(x);
    let (my, vy) = mean_var(y);
    let diff = mx - my;

    let (se2, df) = match variant {
        TTestVariant::Welch => {
            let (a, b) = (vx / nx, vy / ny);
            let df = (a + b).powi(2) / (a * a / (nx - 1.0) + b * b / (ny - 1.0));
            (a + b, df)
        }
        TTestVariant::Pooled => {
            let df = nx + ny - 2.0;
            let sp2 = ((nx - 1.0) * vx + (ny - 1.0) * vy) / df;
            (sp2 * (1.0 / nx + 1.0 / ny), df)
        }
    };

    if se2 <= 0.0 {
        let (statistic, p_value) = if diff == 0.0 { (0.0, 1.0) } else { (diff.signum() * f64::INFINITY, 0.0) };
        return Ok(TTestResult { statistic, df: nx + ny - 2.0, p_value, degenerate: true });
    }
    let statistic = diff / se2.sqrt();
    // Welch df is undefined when one variance is zero; fall back to the other arm.
    let df = if df.is_finite() && df > 0.0 { df } else { nx + ny - 2.0 };
    Ok(TTestResult { statistic, df, p_value: t_two_sided_p(statistic, df)?, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_p_one() {
        let x = [1.0, 2.0, 3.0];
        for v in [TTestVariant::Welch, TTestVariant::Pooled] {
            let r = t_test(&x, &x, v).unwrap();
            assert_eq!(r.statistic, 0.0);
            assert!((r.p_value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_variance_cases() {
        let r = t_test(&[2.0, 2.0], &[2.0, 2.0, 2.0], TTestVariant::Welch).unwrap();
        assert!(r.degenerate && r.p_value == 1.0);
        let r = t_test(&[2.0, 2.0], &[3.0, 3.0], TTestVariant::Pooled).unwrap();
        assert!(r.degenerate && r.p_value == 0.0);
    }

    #[test]
    fn welch_reference_value() {
        // scipy.stats.ttest_ind(x, y, equal_var=False)
        let x = [1.1, 2.3, 2.9, 4.0, 5.2];
        let y = [0.2, 0.9, 1.4, 1.6];
        let r = t_test(&x, &y, TTestVariant::Welch).unwrap();
        let p = t_test(&x, &y, TTestVariant::Pooled).unwrap();
        assert!((r.statistic - 2.696_188_735_381_697_6).abs() < 1e-12);
        assert!((r.df - 5.446_380_949_664_217).abs() < 1e-10);
        assert!((r.p_value - 0.039_388_832_457_561_25).abs() < 1e-10);
        assert!((p.statistic - 2.460_005_617_571_032_8).abs() < 1e-12);
        assert_eq!(p.df, 7.0);
        assert!((p.p_value - 0.043_464_963_323_293_84).abs() < 1e-10);
    }

    #[test]
    fn rejects_short_samples() {
        assert!(t_test(&[1.0], &[1.0, 2.0], TTestVariant::Welch).is_err());
        assert!(t_test(&[1.0, f64::NAN], &[1.0, 2.0], TTestVariant::Welch).is_err());
    }
}
