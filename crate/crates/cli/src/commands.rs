use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;
use wrlab::csv_io::{read_dataset_path, read_hierarchy};
use wrlab::datagen::{exponential_scale_from_dropout, weibull_scale_from_survival};
use wrlab::design::{
    mao_power, mao_sample_size, mao_xi0_from_pilot, precision_sample_size, precision_width, tie_sensitivity_table,
    yu_sample_size, MaoInputs, SampleSize,
};
use wrlab::inference::{
    bootstrap_wr, infer_phi, wald_test_log_wr, win_odds, win_ratio, yu_test, CiMethod, InferenceResult,
};
use wrlab::ranksim::{ranksim_power, RankSimConfig};
use wrlab::rng::DEFAULT_SEED;
use wrlab::sim::{grid_json, preset, run_grid, scenario_config_from_json, write_grid_csv, ScenarioResult};
use wrlab::{tally_unmatched, Arm};

use crate::table::{Cell, Table};
use crate::{
    AnalyzeArgs, CalibrateCmd, Cli, Command, Format, MaoArgs, PowerCmd, RankSimArgs, SampleSizeCmd, SimulateArgs,
};

/// Version tag expected in rank-simulation config files.
pub const RANKSIM_SCHEMA: &str = "wrlab.ranksim.v1";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<wrlab::Error> for CliError {
    fn from(e: wrlab::Error) -> Self {
        use wrlab::Error::*;
        match e {
            InvalidInput(_) | Parse { .. } | Infeasible(_) | InfiniteSampleSize(_) | UnboundedVariance(_) => {
                CliError::Usage(e.to_string())
            }
            AllTies { .. } | DegenerateCounts { .. } | UndefinedStatistic(_) | Io(_) => {
                CliError::Runtime(e.to_string())
            }
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("write failed: {e}"))
}

type Result<T> = std::result::Result<T, CliError>;

enum Output {
    Table(Table),
    Grid(Vec<ScenarioResult>),
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(a) = g.alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {a}")));
        }
    }
    let alpha = g.alpha.unwrap_or(0.05);
    let output = match &cli.command {
        Command::Analyze(a) => Output::Table(analyze(a, g.config.as_deref(), alpha, g.seed.unwrap_or(DEFAULT_SEED))?),
        Command::Power(p) => Output::Table(power(p, alpha)?),
        Command::Samplesize(s) => Output::Table(samplesize(s, alpha)?),
        Command::Ranksim(r) => Output::Table(ranksim(r, cli)?),
        Command::Simulate(s) => Output::Grid(simulate(s, cli)?),
        Command::Calibrate(c) => Output::Table(calibrate(c)?),
    };
    emit(&output, g.format, g.out.as_deref())?;
    if let Output::Grid(results) = &output {
        check_failures(results)?;
    }
    Ok(())
}

fn emit(output: &Output, format: Format, out: Option<&Path>) -> Result<()> {
    let mut w: Box<dyn Write> = match out {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match (output, format) {
        (Output::Table(t), Format::Csv) => t.write_csv(&mut w).map_err(io_err)?,
        (Output::Table(t), Format::Json) => write_json(&mut w, &t.to_json())?,
        (Output::Grid(r), Format::Csv) => write_grid_csv(&mut w, r)?,
        (Output::Grid(r), Format::Json) => write_json(&mut w, &grid_json(r))?,
    }
    w.flush().map_err(io_err)
}

fn write_json(w: &mut dyn Write, v: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, v).map_err(io_err)?;
    writeln!(w).map_err(io_err)
}

/// Results are written first; any analysis or generation failure then turns
/// into exit code 1 with the counts.
fn check_failures(results: &[ScenarioResult]) -> Result<()> {
    let mut problems = Vec::new();
    for r in results {
        if r.n_generation_failures > 0 {
            problems.push(format!("{}: {} iterations failed to generate data", r.id, r.n_generation_failures));
        }
        for m in &r.methods {
            if m.n_failed > 0 {
                problems.push(format!(
                    "{} / {}: {} analyses failed ({} degenerate)",
                    r.id, m.label, m.n_failed, m.power.n_degenerate
                ));
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(problems.join("\n")))
    }
}

fn existing(p: &Path) -> Result<&Path> {
    if p.is_file() {
        Ok(p)
    } else {
        Err(CliError::Usage(format!("{}: no such file", p.display())))
    }
}

fn analyze(a: &AnalyzeArgs, config: Option<&Path>, alpha: f64, seed: u64) -> Result<Table> {
    let hpath =
        a.hierarchy.as_deref().or(config).ok_or_else(|| {
            CliError::Usage("analyze needs --hierarchy (or --config) with the outcome hierarchy".into())
        })?;
    let hierarchy = read_hierarchy(existing(hpath)?)?;
    let data = read_dataset_path(existing(&a.data)?, &hierarchy)?;
    let n_t = data.patients.iter().filter(|p| p.arm == Arm::Treatment).count();
    let n_c = data.patients.len() - n_t;
    if n_t == 0 || n_c == 0 {
        return Err(CliError::Usage("dataset needs patients in both arms".into()));
    }
    let s = tally_unmatched(&data)?;

    let mut t = Table::new(&["section", "quantity", "value"]);
    let mut row = |section: &str, quantity: &str, value: Cell| t.push(vec![section.into(), quantity.into(), value]);
    let names: Vec<&str> = hierarchy.levels().iter().map(|l| l.name.as_str()).collect();
    row("data", "levels", names.join(" > ").into());
    row("data", "n_treatment", n_t.into());
    row("data", "n_control", n_c.into());
    row("data", "n_pairs", s.n_pairs.into());
    row("tally", "n_win", s.n_win.into());
    row("tally", "n_loss", s.n_loss.into());
    row("tally", "n_tie", s.n_tie.into());
    row("tally", "tie_fraction", s.tie_fraction().into());
    row("estimate", "win_ratio", outcome(win_ratio(&s)));
    row("estimate", "win_odds", outcome(win_odds(&s)));

    let results = [
        ("yu-approx", yu_test(&s, n_t, n_c, 1.0, alpha)),
        ("wald-log", wald_test_log_wr(&s, 1.0, alpha)),
        ("wilson-backtransform", infer_phi(&s, alpha, CiMethod::Wilson).map(|p| p.result)),
        ("bootstrap", bootstrap_wr(&data, a.bootstrap, alpha, seed)),
    ];
    for (label, r) in results {
        match r {
            Ok(r) => inference_rows(&mut row, label, &r),
            Err(e) => row(label, "error", e.to_string().into()),
        }
    }
    if let Ok(p) = infer_phi(&s, alpha, CiMethod::Wilson) {
        row("phi", "phi_win", p.phi.into());
        row("phi", "ci_lower", p.phi_ci.0.into());
        row("phi", "ci_upper", p.phi_ci.1.into());
    }
    let decided = s.n_decided();
    for (name, &d) in names.iter().zip(&s.decided_at_level) {
        row(&format!("level:{name}"), "decided", d.into());
        let share = if decided == 0 { Cell::Empty } else { (d as f64 / decided as f64).into() };
        row(&format!("level:{name}"), "share_of_decided", share);
    }
    Ok(t)
}

fn outcome(r: wrlab::Result<f64>) -> Cell {
    match r {
        Ok(x) => x.into(),
        Err(e) => format!("undefined ({e})").into(),
    }
}

fn inference_rows(row: &mut impl FnMut(&str, &str, Cell), label: &str, r: &InferenceResult) {
    row(label, "estimate", r.estimate.into());
    row(label, "ci_lower", r.ci_lower.into());
    row(label, "ci_upper", r.ci_upper.into());
    row(label, "se_log", r.se_log.into());
    row(label, "z", r.z.into());
    row(label, "p_value", r.p_value.into());
    row(label, "flagged", r.flagged.into());
    if let Some(n) = r.n_degenerate {
        row(label, "n_degenerate", n.into());
    }
}

fn mao_inputs(m: &MaoArgs) -> Result<MaoInputs> {
    match &m.pilot {
        Some(path) => {
            let sample = read_pilot(existing(path)?, m.pilot_column.as_deref())?;
            let est = mao_xi0_from_pilot(&sample)?;
            if est.degenerate {
                return Err(CliError::Usage(format!("{}: pilot sample is constant", path.display())));
            }
            Ok(MaoInputs { xi0_sq: est.xi0_sq, w0: est.w0, p_c: m.p_c })
        }
        // clap guarantees both are present without a pilot file
        None => Ok(MaoInputs { xi0_sq: m.xi0_sq.unwrap_or_default(), w0: m.w0.unwrap_or_default(), p_c: m.p_c }),
    }
}

fn read_pilot(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let context = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{context}: {e}")))?;
    let headers = r.headers().map_err(|e| CliError::Usage(format!("{context}: {e}")))?.clone();
    let idx = match column {
        Some(c) => headers
            .iter()
            .position(|h| h.trim() == c)
            .ok_or_else(|| CliError::Usage(format!("{context}: line 1: no column `{c}`")))?,
        None => 0,
    };
    let name = headers.get(idx).unwrap_or("").to_string();
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::Usage(format!("{context}: line {line}: {e}")))?;
        let cell = rec.get(idx).unwrap_or("").trim();
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ => {
                return Err(CliError::Usage(format!(
                    "{context}: line {line}, column `{name}`: expected a finite number, got `{cell}`"
                )))
            }
        }
    }
    Ok(out)
}

fn power(p: &PowerCmd, alpha: f64) -> Result<Table> {
    match p {
        PowerCmd::Yu { wr, n, p_tie, design } => {
            let mut t = Table::new(&["method", "n_total", "wr", "p_t", "p_tie", "power"]);
            for r in tie_sensitivity_table(n, wr, p_tie, design.p_t, alpha, design.sidedness.into())? {
                t.push(vec![
                    "yu".into(),
                    r.n_total.into(),
                    r.wr.into(),
                    design.p_t.into(),
                    r.p_tie.into(),
                    r.power.into(),
                ]);
            }
            Ok(t)
        }
        PowerCmd::Mao { wr, n, mao } => {
            let inp = mao_inputs(mao)?;
            let mut t = Table::new(&["method", "n_total", "wr", "xi0_sq", "w0", "p_c", "power"]);
            for &nt in n {
                for &w in wr {
                    let pw = mao_power(&inp, w, nt, alpha, mao.sidedness.into())?;
                    t.push(vec![
                        "mao".into(),
                        nt.into(),
                        w.into(),
                        inp.xi0_sq.into(),
                        inp.w0.into(),
                        inp.p_c.into(),
                        pw.into(),
                    ]);
                }
            }
            Ok(t)
        }
    }
}

const SAMPLE_SIZE_COLUMNS: [&str; 9] =
    ["method", "wr", "power", "width", "p_tie", "unrounded", "n_total", "n_treatment", "n_control"];

fn size_row(
    method: &str,
    wr: Option<f64>,
    power: Option<f64>,
    width: Option<f64>,
    p_tie: Option<f64>,
    s: &SampleSize,
) -> Vec<Cell> {
    vec![
        method.into(),
        wr.into(),
        power.into(),
        width.into(),
        p_tie.into(),
        s.unrounded.into(),
        s.n_total.into(),
        s.n_treatment.into(),
        s.n_control.into(),
    ]
}

fn samplesize(s: &SampleSizeCmd, alpha: f64) -> Result<Table> {
    let mut t = Table::new(&SAMPLE_SIZE_COLUMNS);
    match s {
        SampleSizeCmd::Yu { wr, power, p_tie, design } => {
            for &w in wr {
                let n = yu_sample_size(w, *power, design.p_t, *p_tie, alpha, design.sidedness.into())?;
                t.push(size_row("yu", Some(w), Some(*power), None, Some(*p_tie), &n));
            }
        }
        SampleSizeCmd::Mao { wr, power, mao } => {
            let inp = mao_inputs(mao)?;
            for &w in wr {
                let n = mao_sample_size(&inp, w, *power, alpha, mao.sidedness.into())?;
                t.push(size_row("mao", Some(w), Some(*power), None, None, &n));
            }
        }
        SampleSizeCmd::Precision { width, p_tie, p_t } => {
            let n = precision_sample_size(*width, *p_t, *p_tie, alpha)?;
            // report the width actually achieved after rounding up
            let achieved = precision_width(n.n_total as f64, *p_t, *p_tie, alpha)?;
            t.push(size_row("precision", None, None, Some(achieved), Some(*p_tie), &n));
        }
    }
    Ok(t)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RankSimFile {
    schema: String,
    #[serde(flatten)]
    config: RankSimConfig,
}

fn read_config_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(existing(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn ranksim(r: &RankSimArgs, cli: &Cli) -> Result<Table> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(path) => {
            let text = read_config_text(path)?;
            let file: RankSimFile =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            if file.schema != RANKSIM_SCHEMA {
                return Err(CliError::Usage(format!(
                    "{}: unsupported schema `{}` (expected `{RANKSIM_SCHEMA}`)",
                    path.display(),
                    file.schema
                )));
            }
            file.config
        }
        None => RankSimConfig::default(),
    };
    if let Some(v) = r.n_t {
        cfg.n_t = v;
    }
    if let Some(v) = r.n_c {
        cfg.n_c = v;
    }
    if let Some(v) = &r.phi {
        cfg.phi_win = v.clone();
    }
    if let Some(v) = r.tie_prob {
        cfg.tie_prob_level1 = v;
    }
    if let Some(v) = r.bootstrap {
        cfg.n_bootstrap = v;
    }
    if let Some(v) = g.iterations {
        cfg.n_iterations = usize::try_from(v).map_err(|_| CliError::Usage("--iterations too large".into()))?;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.alpha {
        cfg.alpha = v;
    }
    let p = ranksim_power(&cfg)?;
    let mut t = Table::new(&[
        "n_t",
        "n_c",
        "phi_win",
        "tie_prob_level1",
        "n_bootstrap",
        "alpha",
        "seed",
        "power",
        "mcse",
        "n_iterations",
        "n_rejections",
        "n_degenerate",
    ]);
    let phi: Vec<String> = cfg.phi_win.iter().map(|&x| wrlab::format::sig6(x)).collect();
    t.push(vec![
        cfg.n_t.into(),
        cfg.n_c.into(),
        phi.join(";").into(),
        cfg.tie_prob_level1.into(),
        cfg.n_bootstrap.into(),
        cfg.alpha.into(),
        cfg.seed.into(),
        p.power.into(),
        p.mcse.into(),
        p.n_iterations.into(),
        p.n_rejections.into(),
        p.n_degenerate.into(),
    ]);
    Ok(t)
}

fn simulate(s: &SimulateArgs, cli: &Cli) -> Result<Vec<ScenarioResult>> {
    let g = &cli.global;
    let (mut grid, default_iterations, config_seed) = match (&s.preset, &g.config) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --preset or --config, not both".into())),
        (None, None) => return Err(CliError::Usage("simulate needs --preset or --config".into())),
        (Some(name), None) => {
            let p = preset(name)?;
            (p.grid, p.default_iterations, None)
        }
        (None, Some(path)) => {
            let cfg = scenario_config_from_json(&read_config_text(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            (cfg.scenarios, cfg.iterations.unwrap_or(1000), cfg.seed)
        }
    };
    if let Some(a) = g.alpha {
        for sc in &mut grid {
            sc.alpha = a;
        }
    }
    let iterations = g.iterations.unwrap_or(default_iterations);
    if iterations == 0 {
        return Err(CliError::Usage("--iterations must be positive".into()));
    }
    let seed = g.seed.or(config_seed).unwrap_or(DEFAULT_SEED);
    Ok(run_grid(&grid, iterations, seed)?)
}

fn calibrate(c: &CalibrateCmd) -> Result<Table> {
    let mut t = Table::new(&["distribution", "time", "target", "shape", "scale"]);
    match *c {
        CalibrateCmd::Weibull { time, survival, shape } => {
            let scale = weibull_scale_from_survival(time, survival, shape)?;
            t.push(vec!["weibull".into(), time.into(), survival.into(), shape.into(), scale.into()]);
        }
        CalibrateCmd::Exponential { time, dropout } => {
            let scale = exponential_scale_from_dropout(time, dropout)?;
            t.push(vec!["exponential".into(), time.into(), dropout.into(), 1.0.into(), scale.into()]);
        }
    }
    Ok(t)
}
