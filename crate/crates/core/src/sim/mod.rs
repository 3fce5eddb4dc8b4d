//! Monte Carlo power studies.
//!
//! A [`Scenario`] couples a data-generating mechanism with the analyses to run
//! on every simulated dataset. [`run_scenario`] applies all analyses to the same
//! dataset in each iteration; [`run_grid`] runs a list of scenarios and
//! flattens the results into long-format rows.

mod engine;
mod output;
mod presets;
mod scenario;

use serde::{Deserialize, Serialize};

pub use engine::{run_grid, run_scenario, GridRow, MethodSummary, ScenarioResult};
pub use output::{grid_json, scenario_config_from_json, write_grid_csv, ScenarioConfig, SCENARIO_SCHEMA};
pub use presets::{
    binary_continuous_grid, binary_continuous_null, iphak, preset, ttfe_weibull_grid, ttfe_weibull_plan, Preset,
    PRESET_NAMES,
};
pub use scenario::{Dgm, HierarchyOrder, Method, Scenario, SimData, WrTest};

/// Monte Carlo standard error of an estimated rejection rate.
pub fn mcse(power: f64, n_iterations: u64) -> f64 {
    if n_iterations == 0 {
        return f64::NAN;
    }
    (power * (1.0 - power) / n_iterations as f64).sqrt()
}

/// Iterations needed for MCSE ≤ `target` in the worst case (power 0.5).
pub fn required_iterations(target_mcse: f64) -> crate::Result<u64> {
    crate::error::check_positive("target MCSE", target_mcse)?;
    // tolerate representation noise such as 0.25 / 0.01² = 2500.0000000000005
    Ok(((0.25 / (target_mcse * target_mcse)) - 1e-9).ceil().max(1.0) as u64)
}

/// Rejection rate with its MCSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub power: f64,
    pub mcse: f64,
    pub n_iterations: u64,
    pub n_rejections: u64,
    /// Iterations whose WR had zero wins or losses (or other degenerate input).
    pub n_degenerate: u64,
}

impl PowerResult {
    pub fn new(n_rejections: u64, n_iterations: u64, n_degenerate: u64) -> Self {
        let power = if n_iterations == 0 { f64::NAN } else { n_rejections as f64 / n_iterations as f64 };
        Self { power, mcse: mcse(power, n_iterations), n_iterations, n_rejections, n_degenerate }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcse_examples() {
        assert!((mcse(0.5, 2500) - 0.01).abs() < 1e-15);
        assert!((mcse(0.872, 1000) - 0.010_565).abs() < 1e-5);
        assert_eq!(mcse(1.0, 10), 0.0);
    }

    #[test]
    fn required_iteration_examples() {
        assert_eq!(required_iterations(0.01).unwrap(), 2500);
        assert_eq!(required_iterations(0.005).unwrap(), 10_000);
        assert_eq!(required_iterations(0.5).unwrap(), 1);
        assert!(required_iterations(0.0).is_err());
    }
}
