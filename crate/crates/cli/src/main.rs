//! `wrlab`: win-ratio analysis, design calculators and power simulations.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wrlab::design::Sidedness;

#[derive(Debug, Parser)]
#[command(name = "wrlab", version, about = "Win-ratio trial design workbench")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON config (hierarchy for `analyze`, scenarios for `simulate`, settings for `ranksim`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed [default: 20250731].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo iterations (overrides config and preset defaults).
    #[arg(long, global = true)]
    pub iterations: Option<u64>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "WRLAB_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Significance level [default: 0.05].
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Win statistics and inference for a two-arm dataset.
    Analyze(AnalyzeArgs),
    /// Power for given sample sizes.
    #[command(subcommand)]
    Power(PowerCmd),
    /// Sample size for a target power or CI width.
    #[command(subcommand)]
    Samplesize(SampleSizeCmd),
    /// Rank-based power simulation.
    Ranksim(RankSimArgs),
    /// Power simulation over a scenario grid.
    Simulate(SimulateArgs),
    /// Distribution parameters from clinical summaries.
    #[command(subcommand)]
    Calibrate(CalibrateCmd),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Dataset CSV (`id`, `arm`, one column per level; `time_<x>`/`event_<x>` for time to event).
    pub data: PathBuf,
    /// Hierarchy JSON; `--config` is used when omitted.
    #[arg(long)]
    pub hierarchy: Option<PathBuf>,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    TwoSided,
    OneSided,
    Symmetric,
}

impl From<SideArg> for Sidedness {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::TwoSided => Sidedness::TwoSided,
            SideArg::OneSided => Sidedness::OneSided,
            SideArg::Symmetric => Sidedness::Symmetric,
        }
    }
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Proportion allocated to treatment.
    #[arg(long, default_value_t = 0.5)]
    pub p_t: f64,
    #[arg(long, value_enum, default_value_t = SideArg::TwoSided)]
    pub sidedness: SideArg,
}

#[derive(Debug, Args)]
pub struct MaoArgs {
    /// ξ₀², variance of the generalized rank under the null.
    #[arg(long, required_unless_present = "pilot", conflicts_with = "pilot")]
    pub xi0_sq: Option<f64>,
    /// W₀, null win probability.
    #[arg(long, required_unless_present = "pilot", conflicts_with = "pilot")]
    pub w0: Option<f64>,
    /// Control allocation proportion.
    #[arg(long, default_value_t = 0.5)]
    pub p_c: f64,
    /// Pilot CSV; ξ₀² and W₀ are estimated from one of its columns.
    #[arg(long)]
    pub pilot: Option<PathBuf>,
    /// Pilot column name [default: first column].
    #[arg(long, requires = "pilot")]
    pub pilot_column: Option<String>,
    #[arg(long, value_enum, default_value_t = SideArg::TwoSided)]
    pub sidedness: SideArg,
}

#[derive(Debug, Subcommand)]
pub enum PowerCmd {
    /// Yu et al. approximation; lists expand to a long-format grid.
    Yu {
        #[arg(long, value_delimiter = ',', required = true)]
        wr: Vec<f64>,
        /// Total sample size.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        p_tie: Vec<f64>,
        #[command(flatten)]
        design: DesignArgs,
    },
    /// Mao's formula.
    Mao {
        #[arg(long, value_delimiter = ',', required = true)]
        wr: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<f64>,
        #[command(flatten)]
        mao: MaoArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum SampleSizeCmd {
    Yu {
        #[arg(long, value_delimiter = ',', required = true)]
        wr: Vec<f64>,
        #[arg(long, default_value_t = 0.8)]
        power: f64,
        #[arg(long, default_value_t = 0.0)]
        p_tie: f64,
        #[command(flatten)]
        design: DesignArgs,
    },
    Mao {
        #[arg(long, value_delimiter = ',', required = true)]
        wr: Vec<f64>,
        #[arg(long, default_value_t = 0.8)]
        power: f64,
        #[command(flatten)]
        mao: MaoArgs,
    },
    /// Sample size giving a log-WR confidence interval of the requested width.
    Precision {
        #[arg(long)]
        width: f64,
        #[arg(long, default_value_t = 0.0)]
        p_tie: f64,
        #[arg(long, default_value_t = 0.5)]
        p_t: f64,
    },
}

#[derive(Debug, Args)]
pub struct RankSimArgs {
    #[arg(long)]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub n_c: Option<usize>,
    /// Win probability among decided pairs, one value per level.
    #[arg(long, value_delimiter = ',')]
    pub phi: Option<Vec<f64>>,
    /// Tie probability at level 1 (two-level designs).
    #[arg(long)]
    pub tie_prob: Option<f64>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in study; mutually exclusive with `--config`.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(wrlab::sim::PRESET_NAMES))]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum CalibrateCmd {
    /// Weibull scale giving survival `S` at `t` for a given shape.
    Weibull {
        #[arg(long)]
        time: f64,
        #[arg(long)]
        survival: f64,
        #[arg(long)]
        shape: f64,
    },
    /// Exponential censoring scale giving a dropout probability by `t`.
    Exponential {
        #[arg(long)]
        time: f64,
        #[arg(long)]
        dropout: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.global.threads;
    match wrlab::par::with_threads(threads, || commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wrlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
