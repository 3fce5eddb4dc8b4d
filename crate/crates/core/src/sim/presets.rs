use super::scenario::{Dgm, HierarchyOrder, Method, Scenario, WrTest};
use crate::datagen::{
    exponential_scale_from_dropout, weibull_scale_from_survival, Censoring, CompositeTtePlan, IphakPlan, WeibullParams,
};
use crate::error::{Error, Result};
use crate::stats::TTestVariant;

pub const PRESET_NAMES: [&str; 4] = ["iphak", "binary-continuous", "binary-continuous-null", "ttfe-weibull"];

/// A named list of scenarios with its default iteration count.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub grid: Vec<Scenario>,
    pub default_iterations: u64,
}

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "iphak" => Ok(Preset { name: "iphak", grid: vec![iphak()], default_iterations: 1000 }),
        "binary-continuous" => {
            Ok(Preset { name: "binary-continuous", grid: binary_continuous_grid(), default_iterations: 2500 })
        }
        "binary-continuous-null" => {
            Ok(Preset { name: "binary-continuous-null", grid: binary_continuous_null(), default_iterations: 2500 })
        }
        "ttfe-weibull" => Ok(Preset { name: "ttfe-weibull", grid: ttfe_weibull_grid()?, default_iterations: 2500 }),
        other => Err(Error::invalid(format!("unknown preset `{other}` (available: {})", PRESET_NAMES.join(", ")))),
    }
}

const T_TEST: Method = Method::TTest { variant: TTestVariant::Welch };

/// 255 analysed patients per arm; WR analysed three ways, EBP by chi-square
/// (with and without continuity correction), DDD by t test.
pub fn iphak() -> Scenario {
    Scenario::new(
        Dgm::Iphak { plan: IphakPlan::default() },
        vec![
            Method::WR_YU,
            Method::WinRatio { test: WrTest::CountWald },
            Method::WinRatio { test: WrTest::Bootstrap { b: 500 } },
            Method::ChiSquare { yates: false },
            Method::ChiSquare { yates: true },
            T_TEST,
        ],
    )
}

pub const BC_P_T: [f64; 5] = [0.35, 0.4, 0.5, 0.6, 0.7];
pub const BC_DELTA: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 1.0];
const BC_ORDERS: [HierarchyOrder; 2] = [HierarchyOrder::BinaryFirst, HierarchyOrder::ContinuousFirst];

fn bc_scenario(p_t: f64, delta: f64, order: HierarchyOrder) -> Scenario {
    Scenario::new(
        Dgm::BinaryContinuous { n_per_arm: 20, p_soc: 0.3, p_t, delta, sd: 1.0, order },
        vec![Method::WR_YU, T_TEST, Method::FisherExact],
    )
}

/// Full factorial: 2 orders × 5 p_T × 5 δ, 20 per arm, p_SoC = 0.3.
pub fn binary_continuous_grid() -> Vec<Scenario> {
    let mut grid = Vec::with_capacity(50);
    for order in BC_ORDERS {
        for p_t in BC_P_T {
            for delta in BC_DELTA {
                grid.push(bc_scenario(p_t, delta, order));
            }
        }
    }
    grid
}

/// The null cell (p_T = p_SoC, δ = 0) under both orders.
pub fn binary_continuous_null() -> Vec<Scenario> {
    BC_ORDERS.iter().map(|&o| bc_scenario(0.3, 0.0, o)).collect()
}

pub const TTE_HR: [f64; 5] = [0.35, 0.5, 0.65, 0.8, 0.95];

/// Death Wb(λ, 4) with 30% two-year mortality, hospitalization Wb(λ, 2)
/// with 85% two-year rate, 10% exponential dropout by day 730, day rounding.
pub fn ttfe_weibull_plan(hr_death: f64, hr_hosp: f64) -> Result<CompositeTtePlan> {
    Ok(CompositeTtePlan {
        death: WeibullParams::new(weibull_scale_from_survival(730.0, 0.7, 4.0)?, 4.0)?,
        hosp: WeibullParams::new(weibull_scale_from_survival(730.0, 0.15, 2.0)?, 2.0)?,
        hr_death,
        hr_hosp,
        censoring: Censoring {
            scale: exponential_scale_from_dropout(730.0, 0.1)?,
            follow_up: 730.0,
            round_to_days: true,
        },
    })
}

/// 5 × 5 hazard-ratio grid, 105 per arm, WR versus log-rank on time to first
/// event.
pub fn ttfe_weibull_grid() -> Result<Vec<Scenario>> {
    let mut grid = Vec::with_capacity(25);
    for hr_death in TTE_HR {
        for hr_hosp in TTE_HR {
            grid.push(Scenario::new(
                Dgm::TteComposite { n_per_arm: 105, plan: ttfe_weibull_plan(hr_death, hr_hosp)? },
                vec![Method::WR_YU, Method::LogRankTtfe],
            ));
        }
    }
    Ok(grid)
}
