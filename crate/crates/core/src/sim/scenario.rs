use serde::{Deserialize, Serialize};

use crate::datagen::{gen_binary_continuous_arm, gen_composite_arm, gen_iphak_arm, CompositeTtePlan, IphakPlan};
use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::outcome::{Arm, Dataset, Direction, Hierarchy, OutcomeKind, OutcomeSpec, PatientRecord, Value};
use crate::rng::{role, stable_hash, Substream};
use crate::stats::{SurvivalSample, TTestVariant, TwoByTwoTable};

/// Which outcome heads the binary/continuous hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HierarchyOrder {
    BinaryFirst,
    ContinuousFirst,
}

impl HierarchyOrder {
    pub fn label(self) -> &'static str {
        match self {
            HierarchyOrder::BinaryFirst => "binary-first",
            HierarchyOrder::ContinuousFirst => "continuous-first",
        }
    }
}

/// Data-generating mechanism of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Dgm {
    /// Independent binary and normal outcomes, both higher favorable; the
    /// continuous outcome is shifted by `delta·sd` in the treatment arm.
    BinaryContinuous {
        n_per_arm: usize,
        p_soc: f64,
        p_t: f64,
        delta: f64,
        #[serde(default = "unit_sd")]
        sd: f64,
        order: HierarchyOrder,
    },
    /// Death then hospitalization, both time to event.
    TteComposite { n_per_arm: usize, plan: CompositeTtePlan },
    /// EBP (binary) then DDD change (continuous), both lower favorable.
    Iphak { plan: IphakPlan },
}

fn unit_sd() -> f64 {
    1.0
}

/// How the unmatched WR is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "kebab-case")]
pub enum WrTest {
    /// Wald test with the approximate variance and plug-in tie proportion.
    Yu,
    /// Wald test with the count-based variance (treats pairs as independent).
    CountWald,
    /// Percentile bootstrap CI excluding 1.
    Bootstrap { b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    WinRatio {
        #[serde(flatten)]
        test: WrTest,
    },
    /// Two-sample t test on the continuous outcome.
    TTest {
        #[serde(default)]
        variant: TTestVariant,
    },
    /// Fisher's exact test on the binary outcome.
    FisherExact,
    /// Pearson chi-square on the binary outcome.
    ChiSquare {
        #[serde(default)]
        yates: bool,
    },
    /// Log-rank test of time to first event.
    LogRankTtfe,
}

impl Method {
    pub const WR_YU: Method = Method::WinRatio { test: WrTest::Yu };

    pub fn label(&self) -> String {
        match self {
            Method::WinRatio { test: WrTest::Yu } => "wr-yu".into(),
            Method::WinRatio { test: WrTest::CountWald } => "wr-count-wald".into(),
            Method::WinRatio { test: WrTest::Bootstrap { b } } => format!("wr-bootstrap-{b}"),
            Method::TTest { variant: TTestVariant::Welch } => "t-test".into(),
            Method::TTest { variant: TTestVariant::Pooled } => "t-test-pooled".into(),
            Method::FisherExact => "fisher-exact".into(),
            Method::ChiSquare { yates: false } => "chi-square".into(),
            Method::ChiSquare { yates: true } => "chi-square-yates".into(),
            Method::LogRankTtfe => "log-rank-ttfe".into(),
        }
    }

    pub fn is_win_ratio(&self) -> bool {
        matches!(self, Method::WinRatio { .. })
    }
}

/// One simulated dataset in every form the analyses need.
#[derive(Debug, Clone)]
pub struct SimData {
    pub dataset: Dataset,
    pub continuous: Option<(Vec<f64>, Vec<f64>)>,
    pub binary: Option<TwoByTwoTable>,
    pub first_event: Option<SurvivalSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub dgm: Dgm,
    pub methods: Vec<Method>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.05
}

impl Scenario {
    pub fn new(dgm: Dgm, methods: Vec<Method>) -> Self {
        Self { dgm, methods, alpha: 0.05 }
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("alpha", self.alpha)?;
        if self.methods.is_empty() {
            return Err(Error::invalid("scenario has no analysis methods"));
        }
        match &self.dgm {
            Dgm::BinaryContinuous { n_per_arm, p_soc, p_t, delta, sd, .. } => {
                check_n(*n_per_arm)?;
                check_unit("p_soc", *p_soc)?;
                check_unit("p_t", *p_t)?;
                crate::error::check_positive("sd", *sd)?;
                if !delta.is_finite() {
                    return Err(Error::invalid("delta must be finite"));
                }
            }
            Dgm::TteComposite { n_per_arm, plan } => {
                check_n(*n_per_arm)?;
                plan.validate()?;
            }
            Dgm::Iphak { plan } => {
                plan.validate()?;
                if plan.n_per_arm < 2 {
                    return Err(Error::invalid("IPHAK arm size must be at least 2"));
                }
            }
        }
        let tte = matches!(self.dgm, Dgm::TteComposite { .. });
        for m in &self.methods {
            let ok = match m {
                Method::WinRatio { test: WrTest::Bootstrap { b } } => *b >= 2,
                Method::WinRatio { .. } => true,
                Method::LogRankTtfe => tte,
                _ => !tte,
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "method `{}` does not apply to this data-generating mechanism",
                    m.label()
                )));
            }
        }
        Ok(())
    }

    /// Factor names and values identifying the scenario in output tables.
    pub fn factors(&self) -> Vec<(String, String)> {
        let f = |k: &str, v: String| (k.to_string(), v);
        match &self.dgm {
            Dgm::BinaryContinuous { n_per_arm, p_soc, p_t, delta, order, .. } => vec![
                f("n_per_arm", n_per_arm.to_string()),
                f("p_soc", p_soc.to_string()),
                f("p_t", p_t.to_string()),
                f("delta", delta.to_string()),
                f("order", order.label().to_string()),
            ],
            Dgm::TteComposite { n_per_arm, plan } => vec![
                f("n_per_arm", n_per_arm.to_string()),
                f("hr_death", plan.hr_death.to_string()),
                f("hr_hosp", plan.hr_hosp.to_string()),
            ],
            Dgm::Iphak { plan } => vec![f("n_per_arm", plan.n_per_arm.to_string())],
        }
    }

    pub fn id(&self) -> String {
        let kind = match self.dgm {
            Dgm::BinaryContinuous { .. } => "binary-continuous",
            Dgm::TteComposite { .. } => "tte-composite",
            Dgm::Iphak { .. } => "iphak",
        };
        let parts: Vec<String> = self.factors().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{kind}[{}]", parts.join(","))
    }

    /// Stable key of the data-generating factors only. The hierarchy order and
    /// the analyses are excluded, so scenarios that differ only in those see
    /// identical datasets.
    pub fn data_key(&self) -> u64 {
        let text = match &self.dgm {
            Dgm::BinaryContinuous { n_per_arm, p_soc, p_t, delta, sd, .. } => {
                format!("bc|{n_per_arm}|{p_soc}|{p_t}|{delta}|{sd}")
            }
            Dgm::TteComposite { n_per_arm, plan } => format!(
                "tte|{n_per_arm}|{}|{}|{}|{}|{}|{}|{}|{}|{}",
                plan.death.scale,
                plan.death.shape,
                plan.hosp.scale,
                plan.hosp.shape,
                plan.hr_death,
                plan.hr_hosp,
                plan.censoring.scale,
                plan.censoring.follow_up,
                plan.censoring.round_to_days
            ),
            Dgm::Iphak { plan } => format!(
                "iphak|{}|{}|{}|{}|{}|{}|{}",
                plan.n_per_arm,
                plan.prevalence_pa,
                plan.ebp_rate_pa_treatment,
                plan.ebp_rate_pa_control,
                plan.ebp_rate_non_pa,
                plan.ddd_mean_pa_treatment,
                plan.ddd_sd
            ),
        };
        stable_hash(&text)
    }

    pub fn hierarchy(&self) -> Hierarchy {
        let levels = match &self.dgm {
            Dgm::BinaryContinuous { order, .. } => {
                let b = OutcomeSpec::new("binary", OutcomeKind::Binary, Direction::HigherFavorable);
                let c = OutcomeSpec::new("continuous", OutcomeKind::Continuous, Direction::HigherFavorable);
                match order {
                    HierarchyOrder::BinaryFirst => vec![b, c],
                    HierarchyOrder::ContinuousFirst => vec![c, b],
                }
            }
            Dgm::TteComposite { .. } => vec![
                OutcomeSpec::new("death", OutcomeKind::TimeToEvent, Direction::HigherFavorable),
                OutcomeSpec::new("hosp", OutcomeKind::TimeToEvent, Direction::HigherFavorable),
            ],
            Dgm::Iphak { .. } => vec![
                OutcomeSpec::new("ebp", OutcomeKind::Binary, Direction::LowerFavorable),
                OutcomeSpec::new("ddd", OutcomeKind::Continuous, Direction::LowerFavorable),
            ],
        };
        Hierarchy::new(levels).expect("preset hierarchies are valid")
    }

    /// Dataset of iteration `iteration` under the data stream `data`
    /// (already keyed by the master seed and [`Scenario::data_key`]).
    pub fn generate(&self, data: &Substream, iteration: u64) -> Result<SimData> {
        let mut rng_t = data.rng(&[iteration, role::TREATMENT]);
        let mut rng_c = data.rng(&[iteration, role::CONTROL]);
        let hierarchy = self.hierarchy();
        let mut patients = Vec::new();
        let out = match &self.dgm {
            Dgm::BinaryContinuous { n_per_arm, p_soc, p_t, delta, sd, order } => {
                let t = gen_binary_continuous_arm(*p_t, *delta, *sd, *n_per_arm, &mut rng_t)?;
                let c = gen_binary_continuous_arm(*p_soc, 0.0, *sd, *n_per_arm, &mut rng_c)?;
                for (arm, rows) in [(Arm::Treatment, &t), (Arm::Control, &c)] {
                    for (i, &(b, x)) in rows.iter().enumerate() {
                        let b = Value::Scalar(if b { 1.0 } else { 0.0 });
                        let x = Value::Scalar(x);
                        let values = match order {
                            HierarchyOrder::BinaryFirst => vec![b, x],
                            HierarchyOrder::ContinuousFirst => vec![x, b],
                        };
                        patients.push(PatientRecord::new(format!("{arm}{}", i + 1), arm, values));
                    }
                }
                let succ = |rows: &[(bool, f64)]| rows.iter().filter(|r| r.0).count() as u64;
                SimData {
                    dataset: Dataset { hierarchy, patients },
                    continuous: Some((t.iter().map(|r| r.1).collect(), c.iter().map(|r| r.1).collect())),
                    binary: Some(TwoByTwoTable::from_arms(succ(&t), t.len() as u64, succ(&c), c.len() as u64)?),
                    first_event: None,
                }
            }
            Dgm::TteComposite { n_per_arm, plan } => {
                let t = gen_composite_arm(plan, Arm::Treatment, *n_per_arm, &mut rng_t)?;
                let c = gen_composite_arm(plan, Arm::Control, *n_per_arm, &mut rng_c)?;
                let mut first = SurvivalSample::default();
                for (arm, rows) in [(Arm::Treatment, &t), (Arm::Control, &c)] {
                    for (i, o) in rows.iter().enumerate() {
                        let values = vec![Value::event(o.death.0, o.death.1), Value::event(o.hosp.0, o.hosp.1)];
                        patients.push(PatientRecord::new(format!("{arm}{}", i + 1), arm, values));
                        first.push(o.first.0, o.first.1, arm);
                    }
                }
                SimData {
                    dataset: Dataset { hierarchy, patients },
                    continuous: None,
                    binary: None,
                    first_event: Some(first),
                }
            }
            Dgm::Iphak { plan } => {
                let t = gen_iphak_arm(plan, Arm::Treatment, &mut rng_t)?;
                let c = gen_iphak_arm(plan, Arm::Control, &mut rng_c)?;
                for (arm, rows) in [(Arm::Treatment, &t), (Arm::Control, &c)] {
                    for (i, p) in rows.iter().enumerate() {
                        let values = vec![Value::Scalar(if p.ebp { 1.0 } else { 0.0 }), Value::Scalar(p.ddd_change)];
                        patients.push(PatientRecord::new(format!("{arm}{}", i + 1), arm, values));
                    }
                }
                let succ = |rows: &[crate::datagen::IphakPatient]| rows.iter().filter(|r| r.ebp).count() as u64;
                SimData {
                    dataset: Dataset { hierarchy, patients },
                    continuous: Some((
                        t.iter().map(|r| r.ddd_change).collect(),
                        c.iter().map(|r| r.ddd_change).collect(),
                    )),
                    binary: Some(TwoByTwoTable::from_arms(succ(&t), t.len() as u64, succ(&c), c.len() as u64)?),
                    first_event: None,
                }
            }
        };
        Ok(out)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::invalid(format!("arm size must be at least 2, got {n}")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bc(order: HierarchyOrder) -> Scenario {
        Scenario::new(
            Dgm::BinaryContinuous { n_per_arm: 20, p_soc: 0.3, p_t: 0.5, delta: 0.5, sd: 1.0, order },
            vec![Method::WR_YU, Method::FisherExact],
        )
    }

    #[test]
    fn orders_share_data() {
        let a = bc(HierarchyOrder::BinaryFirst);
        let b = bc(HierarchyOrder::ContinuousFirst);
        assert_eq!(a.data_key(), b.data_key());
        assert_ne!(a.id(), b.id());
        let s = Substream::new(1).child(&[a.data_key()]);
        let da = a.generate(&s, 3).unwrap();
        let db = b.generate(&s, 3).unwrap();
        assert_eq!(da.continuous, db.continuous);
        assert_eq!(da.dataset.patients[0].values[0], db.dataset.patients[0].values[1]);
    }

    #[test]
    fn method_compatibility() {
        let mut s = bc(HierarchyOrder::BinaryFirst);
        assert!(s.validate().is_ok());
        s.methods.push(Method::LogRankTtfe);
        assert!(s.validate().is_err());
    }

    #[test]
    fn method_json() {
        let m: Vec<Method> = serde_json::from_str(
            r#"[{"method":"win-ratio","test":"yu"},{"method":"win-ratio","test":"bootstrap","b":200},
                {"method":"chi-square","yates":true},{"method":"t-test"}]"#,
        )
        .unwrap();
        assert_eq!(m[0], Method::WR_YU);
        assert_eq!(m[1], Method::WinRatio { test: WrTest::Bootstrap { b: 200 } });
        assert_eq!(m[2].label(), "chi-square-yates");
        assert_eq!(m[3].label(), "t-test");
    }
}
