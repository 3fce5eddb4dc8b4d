use serde::Serialize;

use super::scenario::{Method, Scenario, SimData, WrTest};
use super::PowerResult;
use crate::error::{Error, Result};
use crate::inference::{bootstrap_matrix, wald_test_log_wr, win_ratio, yu_test};
use crate::par;
use crate::rng::{role, Substream};
use crate::stats::{chi_square_test, fisher_exact, log_rank_test, t_test};
use crate::tally::{tally_unmatched, VerdictMatrix, WinStats};

/// Aggregated result of one method in one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub label: String,
    #[serde(flatten)]
    pub power: PowerResult,
    /// Iterations where the analysis itself failed (not counted as rejections).
    pub n_failed: u64,
    /// WR only: decided pairs per level, summed over iterations.
    pub decided_at_level: Option<Vec<u64>>,
    /// WR only: mean of the finite WR estimates.
    pub mean_wr: Option<f64>,
    pub mean_tie_fraction: Option<f64>,
}

impl MethodSummary {
    /// Share of decided pairs resolved at each level.
    pub fn decided_fractions(&self) -> Option<Vec<f64>> {
        self.decided_at_level.as_ref().map(|d| {
            let total: u64 = d.iter().sum();
            d.iter().map(|&x| if total == 0 { f64::NAN } else { x as f64 / total as f64 }).collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub id: String,
    pub factors: Vec<(String, String)>,
    pub scenario: Scenario,
    pub methods: Vec<MethodSummary>,
    /// Iterations whose data could not be generated (every method skipped).
    pub n_generation_failures: u64,
}

impl ScenarioResult {
    pub fn method(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.label == label)
    }

    pub fn rows(&self) -> Vec<GridRow> {
        self.methods
            .iter()
            .map(|m| GridRow {
                scenario: self.id.clone(),
                factors: self.factors.clone(),
                method: m.label.clone(),
                power: m.power.power,
                mcse: m.power.mcse,
                n_iter: m.power.n_iterations,
                n_rejections: m.power.n_rejections,
                n_degenerate: m.power.n_degenerate,
                n_failed: m.n_failed + self.n_generation_failures,
                mean_wr: m.mean_wr,
                mean_tie_fraction: m.mean_tie_fraction,
                decided_fractions: m.decided_fractions().unwrap_or_default(),
            })
            .collect()
    }
}

/// One long-format output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub scenario: String,
    pub factors: Vec<(String, String)>,
    pub method: String,
    pub power: f64,
    pub mcse: f64,
    pub n_iter: u64,
    pub n_rejections: u64,
    pub n_degenerate: u64,
    pub n_failed: u64,
    pub mean_wr: Option<f64>,
    pub mean_tie_fraction: Option<f64>,
    pub decided_fractions: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Decided { reject: bool, degenerate: bool },
    Failed,
}

struct Iteration {
    outcomes: Vec<Outcome>,
    wr: Option<WinStats>,
}

fn wr_degenerate(stats: &WinStats) -> Outcome {
    // zero losses with wins (or the reverse): infinite log WR, the flagged
    // interval excludes 1; all ties: nothing to test
    Outcome::Decided { reject: stats.n_decided() > 0, degenerate: true }
}

fn analyse(s: &Scenario, data: &SimData, boot: &Substream) -> Iteration {
    let alpha = s.alpha;
    let needs_wr = s.methods.iter().any(Method::is_win_ratio);
    let wr = if needs_wr { tally_unmatched(&data.dataset).ok() } else { None };
    let needs_matrix = s.methods.iter().any(|m| matches!(m, Method::WinRatio { test: WrTest::Bootstrap { .. } }));
    let matrix = if needs_matrix { VerdictMatrix::build(&data.dataset).ok() } else { None };
    let (n_t, n_c) = data.dataset.arm_sizes();

    let outcomes = s
        .methods
        .iter()
        .map(|m| {
            let decided = |reject: bool, degenerate: bool| Outcome::Decided { reject, degenerate };
            match *m {
                Method::WinRatio { test } => {
                    let Some(stats) = wr.as_ref() else { return Outcome::Failed };
                    let one_sided = stats.n_win == 0 || stats.n_loss == 0;
                    if stats.n_decided() == 0 || (one_sided && !matches!(test, WrTest::Bootstrap { .. })) {
                        return wr_degenerate(stats);
                    }
                    match test {
                        WrTest::Yu => match yu_test(stats, n_t, n_c, 1.0, alpha) {
                            Ok(r) => decided(r.p_value <= alpha, r.flagged),
                            Err(_) => Outcome::Failed,
                        },
                        WrTest::CountWald => match wald_test_log_wr(stats, 1.0, alpha) {
                            Ok(r) => decided(r.p_value <= alpha, false),
                            Err(_) => Outcome::Failed,
                        },
                        WrTest::Bootstrap { b } => {
                            let Some(matrix) = matrix.as_ref() else { return Outcome::Failed };
                            match bootstrap_matrix(matrix, stats, b, alpha, boot) {
                                Ok(r) => decided(r.excludes(1.0), r.flagged),
                                Err(Error::AllTies { .. }) => decided(false, true),
                                Err(_) => Outcome::Failed,
                            }
                        }
                    }
                }
                Method::TTest { variant } => match data.continuous.as_ref() {
                    Some((t, c)) => match t_test(t, c, variant) {
                        Ok(r) => decided(r.p_value <= alpha, r.degenerate),
                        Err(_) => Outcome::Failed,
                    },
                    None => Outcome::Failed,
                },
                Method::FisherExact => match data.binary.as_ref() {
                    Some(table) => decided(fisher_exact(table) <= alpha, table.has_zero_margin()),
                    None => Outcome::Failed,
                },
                Method::ChiSquare { yates } => match data.binary.as_ref() {
                    Some(table) => {
                        let r = chi_square_test(table, yates);
                        decided(r.p_value <= alpha, r.degenerate)
                    }
                    None => Outcome::Failed,
                },
                Method::LogRankTtfe => match data.first_event.as_ref() {
                    Some(sample) => match log_rank_test(sample) {
                        Ok(r) => decided(r.p_value <= alpha, false),
                        Err(_) => Outcome::Failed,
                    },
                    None => Outcome::Failed,
                },
            }
        })
        .collect();
    Iteration { outcomes, wr }
}

/// Runs `n_iterations` iterations of one scenario.
///
/// Iteration `i` draws its data from substream `(data_key, i)` of
/// `master_seed`, so results do not depend on the thread count or on which
/// other methods are requested.
pub fn run_scenario(s: &Scenario, n_iterations: u64, master_seed: u64) -> Result<ScenarioResult> {
    s.validate()?;
    if n_iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    let root = Substream::new(master_seed);
    let data_stream = root.child(&[s.data_key()]);
    let iterations = par::map_range(0..n_iterations as usize, |i| {
        let i = i as u64;
        match s.generate(&data_stream, i) {
            Ok(data) => Some(analyse(s, &data, &root.child(&[s.data_key(), role::BOOTSTRAP, i]))),
            Err(_) => None,
        }
    });

    let levels = s.hierarchy().len();
    let mut rejections = vec![0u64; s.methods.len()];
    let mut degenerate = vec![0u64; s.methods.len()];
    let mut failed = vec![0u64; s.methods.len()];
    let mut decided_at_level = vec![0u64; levels];
    let (mut wr_sum, mut wr_n, mut tie_sum, mut tie_n) = (0.0, 0u64, 0.0, 0u64);
    let mut generation_failures = 0u64;
    for it in &iterations {
        let Some(it) = it else {
            generation_failures += 1;
            continue;
        };
        for (k, o) in it.outcomes.iter().enumerate() {
            match *o {
                Outcome::Decided { reject, degenerate: d } => {
                    rejections[k] += u64::from(reject);
                    degenerate[k] += u64::from(d);
                }
                Outcome::Failed => failed[k] += 1,
            }
        }
        if let Some(w) = &it.wr {
            for (acc, x) in decided_at_level.iter_mut().zip(&w.decided_at_level) {
                *acc += x;
            }
            tie_sum += w.tie_fraction();
            tie_n += 1;
            if let Ok(v) = win_ratio(w) {
                if v.is_finite() {
                    wr_sum += v;
                    wr_n += 1;
                }
            }
        }
    }
    let mean = |sum: f64, n: u64| if n == 0 { f64::NAN } else { sum / n as f64 };
    let methods = s
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let is_wr = m.is_win_ratio();
            MethodSummary {
                method: *m,
                label: m.label(),
                power: PowerResult::new(rejections[k], n_iterations, degenerate[k]),
                n_failed: failed[k],
                decided_at_level: is_wr.then(|| decided_at_level.clone()),
                mean_wr: is_wr.then(|| mean(wr_sum, wr_n)),
                mean_tie_fraction: is_wr.then(|| mean(tie_sum, tie_n)),
            }
        })
        .collect();
    Ok(ScenarioResult {
        id: s.id(),
        factors: s.factors(),
        scenario: s.clone(),
        methods,
        n_generation_failures: generation_failures,
    })
}

/// Runs every scenario with the same master seed; each cell's data come from
/// its own substream.
pub fn run_grid(grid: &[Scenario], n_iterations: u64, master_seed: u64) -> Result<Vec<ScenarioResult>> {
    if grid.is_empty() {
        return Err(Error::invalid("scenario grid is empty"));
    }
    for s in grid {
        s.validate()?;
    }
    grid.iter().map(|s| run_scenario(s, n_iterations, master_seed)).collect()
}
