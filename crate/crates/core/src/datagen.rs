//! Calibrated generators for the simulation data-generating mechanisms.
//!
//! Every generator takes an explicit RNG so callers can hand it a substream
//! derived from `(scenario, iteration, arm)`.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, check_positive, check_unit, Error, Result};
use crate::outcome::Arm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub scale: f64,
    pub shape: f64,
}

impl WeibullParams {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        check_positive("Weibull scale", scale)?;
        check_positive("Weibull shape", shape)?;
        Ok(Self { scale, shape })
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-(t / self.scale).powf(self.shape)).exp()
    }

    /// Proportional-hazards version: hazard multiplied by `hr`, same shape.
    pub fn with_hazard_ratio(&self, hr: f64) -> Self {
        Self { scale: self.scale * hr.powf(-1.0 / self.shape), shape: self.shape }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.scale * (-(1.0 - u).ln()).powf(1.0 / self.shape)
    }
}

/// Scale λ with `exp(−(t/λ)^κ) = s`.
pub fn weibull_scale_from_survival(t: f64, s: f64, kappa: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_open_unit("survival probability", s)?;
    check_positive("kappa", kappa)?;
    Ok(t / (-s.ln()).powf(1.0 / kappa))
}

/// Exponential scale giving dropout probability `p_drop` by time `t`.
pub fn exponential_scale_from_dropout(t: f64, p_drop: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_open_unit("dropout probability", p_drop)?;
    Ok(t / -(1.0 - p_drop).ln())
}

/// Administrative plus dropout censoring shared by all time-to-event outcomes
/// of a patient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Censoring {
    /// Exponential dropout scale (mean).
    pub scale: f64,
    pub follow_up: f64,
    /// Round observed times up to whole days.
    pub round_to_days: bool,
}

impl Censoring {
    pub fn validate(&self) -> Result<()> {
        check_positive("censoring scale", self.scale)?;
        check_positive("follow-up", self.follow_up)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let drop = Exp::new(1.0 / self.scale).expect("validated scale").sample(rng);
        drop.min(self.follow_up)
    }

    fn observe(&self, event_time: f64, censor_time: f64) -> (f64, bool) {
        let event = event_time <= censor_time;
        let t = event_time.min(censor_time);
        (if self.round_to_days { t.ceil() } else { t }, event)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtePlan {
    pub event: WeibullParams,
    pub hazard_ratio: f64,
    pub censoring: Censoring,
}

impl TtePlan {
    pub fn validate(&self) -> Result<()> {
        WeibullParams::new(self.event.scale, self.event.shape)?;
        check_positive("hazard ratio", self.hazard_ratio)?;
        self.censoring.validate()
    }

    fn arm_params(&self, arm: Arm) -> WeibullParams {
        match arm {
            Arm::Treatment => self.event.with_hazard_ratio(self.hazard_ratio),
            Arm::Control => self.event,
        }
    }
}

/// Observed `(time, event)` for one Weibull outcome; the hazard ratio applies
/// to the treatment arm only.
pub fn gen_tte_arm<R: Rng + ?Sized>(plan: &TtePlan, arm: Arm, n: usize, rng: &mut R) -> Result<Vec<(f64, bool)>> {
    plan.validate()?;
    check_n(n)?;
    let params = plan.arm_params(arm);
    Ok((0..n)
        .map(|_| {
            let e = params.sample(rng);
            let c = plan.censoring.draw(rng);
            plan.censoring.observe(e, c)
        })
        .collect())
}

/// Death and hospitalization as competing Weibull outcomes with their own
/// hazard ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeTtePlan {
    pub death: WeibullParams,
    pub hosp: WeibullParams,
    pub hr_death: f64,
    pub hr_hosp: f64,
    pub censoring: Censoring,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeObs {
    pub death: (f64, bool),
    /// Censored at death when death comes first.
    pub hosp: (f64, bool),
    /// Time to first event of either kind.
    pub first: (f64, bool),
}

impl CompositeTtePlan {
    pub fn validate(&self) -> Result<()> {
        WeibullParams::new(self.death.scale, self.death.shape)?;
        WeibullParams::new(self.hosp.scale, self.hosp.shape)?;
        check_positive("death hazard ratio", self.hr_death)?;
        check_positive("hospitalization hazard ratio", self.hr_hosp)?;
        self.censoring.validate()
    }
}

pub fn gen_composite_arm<R: Rng + ?Sized>(
    plan: &CompositeTtePlan,
    arm: Arm,
    n: usize,
    rng: &mut R,
) -> Result<Vec<CompositeObs>> {
    plan.validate()?;
    check_n(n)?;
    let (death, hosp) = match arm {
        Arm::Treatment => (plan.death.with_hazard_ratio(plan.hr_death), plan.hosp.with_hazard_ratio(plan.hr_hosp)),
        Arm::Control => (plan.death, plan.hosp),
    };
    let cens = &plan.censoring;
    Ok((0..n)
        .map(|_| {
            let d = death.sample(rng);
            let h = hosp.sample(rng);
            let c = cens.draw(rng);
            CompositeObs {
                death: cens.observe(d, c),
                hosp: cens.observe(h, c.min(d)),
                first: cens.observe(d.min(h), c),
            }
        })
        .collect())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("arm size must be at least 1"))
    } else {
        Ok(())
    }
}

/// Independent Bernoulli(`p`) and Normal(`delta·sd`, `sd`) outcomes per patient;
/// pass `delta = 0` for the reference arm.
pub fn gen_binary_continuous_arm<R: Rng + ?Sized>(
    p: f64,
    delta: f64,
    sd: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(bool, f64)>> {
    check_unit("p", p)?;
    check_positive("sd", sd)?;
    check_n(n)?;
    if !delta.is_finite() {
        return Err(Error::invalid("delta must be finite"));
    }
    let normal = Normal::new(delta * sd, sd).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((0..n).map(|_| (rng.random::<f64>() < p, normal.sample(rng))).collect())
}

/// Two-subgroup mixture: binary EBP and continuous DDD change, both lower
/// favorable, with rates and means depending on arm and PA status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IphakPlan {
    pub prevalence_pa: f64,
    pub ebp_rate_pa_treatment: f64,
    pub ebp_rate_pa_control: f64,
    pub ebp_rate_non_pa: f64,
    pub ddd_mean_pa_treatment: f64,
    pub ddd_sd: f64,
    pub n_per_arm: usize,
}

impl Default for IphakPlan {
    fn default() -> Self {
        Self {
            prevalence_pa: 0.3,
            ebp_rate_pa_treatment: 0.68,
            ebp_rate_pa_control: 0.85,
            ebp_rate_non_pa: 0.81,
            ddd_mean_pa_treatment: -1.364,
            ddd_sd: 1.8,
            n_per_arm: 255,
        }
    }
}

impl IphakPlan {
    pub fn validate(&self) -> Result<()> {
        check_unit("PA prevalence", self.prevalence_pa)?;
        check_unit("EBP rate (PA, treatment)", self.ebp_rate_pa_treatment)?;
        check_unit("EBP rate (PA, control)", self.ebp_rate_pa_control)?;
        check_unit("EBP rate (non-PA)", self.ebp_rate_non_pa)?;
        check_positive("DDD sd", self.ddd_sd)?;
        if !self.ddd_mean_pa_treatment.is_finite() {
            return Err(Error::invalid("DDD mean must be finite"));
        }
        check_n(self.n_per_arm)
    }

    pub fn ebp_rate(&self, arm: Arm, pa: bool) -> f64 {
        match (pa, arm) {
            (false, _) => self.ebp_rate_non_pa,
            (true, Arm::Treatment) => self.ebp_rate_pa_treatment,
            (true, Arm::Control) => self.ebp_rate_pa_control,
        }
    }

    pub fn ddd_mean(&self, arm: Arm, pa: bool) -> f64 {
        if pa && arm == Arm::Treatment {
            self.ddd_mean_pa_treatment
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IphakPatient {
    pub pa: bool,
    pub ebp: bool,
    pub ddd_change: f64,
}

pub fn gen_iphak_arm<R: Rng + ?Sized>(plan: &IphakPlan, arm: Arm, rng: &mut R) -> Result<Vec<IphakPatient>> {
    plan.validate()?;
    let noise = Normal::new(0.0, plan.ddd_sd).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((0..plan.n_per_arm)
        .map(|_| {
            let pa = rng.random::<f64>() < plan.prevalence_pa;
            let ebp = rng.random::<f64>() < plan.ebp_rate(arm, pa);
            let ddd_change = plan.ddd_mean(arm, pa) + noise.sample(rng);
            IphakPatient { pa, ebp, ddd_change }
        })
        .collect())
}
