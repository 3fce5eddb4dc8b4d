use serde::{Deserialize, Serialize};

use super::kernels::chi2_sf;
use crate::error::{Error, Result};
use crate::outcome::Arm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalObs {
    pub time: f64,
    /// `true` = event observed, `false` = right-censored.
    pub event: bool,
    pub arm: Arm,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSample {
    pub obs: Vec<SurvivalObs>,
}

impl SurvivalSample {
    pub fn new(obs: Vec<SurvivalObs>) -> Result<Self> {
        if let Some(o) = obs.iter().find(|o| !o.time.is_finite() || o.time < 0.0) {
            return Err(Error::invalid(format!("survival times must be finite and nonnegative, got {}", o.time)));
        }
        Ok(Self { obs })
    }

    pub fn push(&mut self, time: f64, event: bool, arm: Arm) {
        self.obs.push(SurvivalObs { time, event, arm });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRankResult {
    /// Σ(O − E) for the treatment arm.
    pub observed_minus_expected: f64,
    pub variance: f64,
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-group log-rank test (the score test of a two-group Cox model).
///
/// At each distinct event time the treatment arm's observed events are compared
/// with their expectation under the null; tied event times use the
/// hypergeometric variance `d·(n₁/n)(1 − n₁/n)(n − d)/(n − 1)`.
pub fn log_rank_test(s: &SurvivalSample) -> Result<LogRankResult> {
    let n_t = s.obs.iter().filter(|o| o.arm == Arm::Treatment).count();
    if n_t == 0 || n_t == s.obs.len() {
        return Err(Error::invalid("log-rank test needs both arms present"));
    }
    if !s.obs.iter().any(|o| o.event) {
        return Err(Error::UndefinedStatistic("no events observed".into()));
    }
    let mut obs: Vec<&SurvivalObs> = s.obs.iter().collect();
    obs.sort_by(|a, b| a.time.total_cmp(&b.time));

    let mut at_risk = obs.len() as f64;
    let mut at_risk_t = n_t as f64;
    let mut o_minus_e = 0.0;
    let mut var = 0.0;
    let mut i = 0;
    while i < obs.len() {
        let time = obs[i].time;
        let (mut d, mut d_t, mut leave, mut leave_t) = (0.0, 0.0, 0.0, 0.0);
        while i < obs.len() && obs[i].time == time {
            let is_t = obs[i].arm == Arm::Treatment;
            if obs[i].event {
                d += 1.0;
                if is_t {
                    d_t += 1.0;
                }
            }
            leave += 1.0;
            if is_t {
                leave_t += 1.0;
            }
            i += 1;
        }
        if d > 0.0 {
            let frac = at_risk_t / at_risk;
            o_minus_e += d_t - d * frac;
            if at_risk > 1.0 {
                var += d * frac * (1.0 - frac) * (at_risk - d) / (at_risk - 1.0);
            }
        }
        at_risk -= leave;
        at_risk_t -= leave_t;
    }
    if var.is_nan() || var <= 0.0 {
        return Err(Error::UndefinedStatistic("log-rank variance is zero".into()));
    }
    let statistic = o_minus_e * o_minus_e / var;
    Ok(LogRankResult {
        observed_minus_expected: o_minus_e,
        variance: var,
        statistic,
        p_value: chi2_sf(statistic, 1.0)?,
    })
}
