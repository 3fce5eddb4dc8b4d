use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use super::engine::{GridRow, ScenarioResult};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::format::sig6;

/// Version tag expected in scenario config files.
pub const SCENARIO_SCHEMA: &str = "wrlab.scenarios.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    #[serde(default)]
    pub iterations: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub scenarios: Vec<Scenario>,
}

pub fn scenario_config_from_json(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("scenario config: {e}")))?;
    if cfg.schema != SCENARIO_SCHEMA {
        return Err(Error::invalid(format!(
            "scenario config: unsupported schema `{}` (expected `{SCENARIO_SCHEMA}`)",
            cfg.schema
        )));
    }
    if cfg.scenarios.is_empty() {
        return Err(Error::invalid("scenario config lists no scenarios"));
    }
    for s in &cfg.scenarios {
        s.validate()?;
    }
    Ok(cfg)
}

fn rows(results: &[ScenarioResult]) -> Vec<GridRow> {
    results.iter().flat_map(ScenarioResult::rows).collect()
}

fn factor_columns(rows: &[GridRow]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        for (k, _) in &r.factors {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

/// Long format: `scenario, <factors…>, method, power, mcse, n_iter,
/// n_rejections, n_degenerate, n_failed, mean_wr, mean_tie_fraction,
/// decided_level_<k>…`. Numbers carry six significant digits.
pub fn write_grid_csv<W: Write>(writer: W, results: &[ScenarioResult]) -> Result<()> {
    let rows = rows(results);
    let factors = factor_columns(&rows);
    let levels = rows.iter().map(|r| r.decided_fractions.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["scenario".to_string()];
    header.extend(factors.iter().cloned());
    header.extend(
        [
            "method",
            "power",
            "mcse",
            "n_iter",
            "n_rejections",
            "n_degenerate",
            "n_failed",
            "mean_wr",
            "mean_tie_fraction",
        ]
        .map(String::from),
    );
    header.extend((1..=levels).map(|k| format!("decided_level_{k}")));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for r in &rows {
        let mut rec = vec![r.scenario.clone()];
        for f in &factors {
            rec.push(r.factors.iter().find(|(k, _)| k == f).map(|(_, v)| v.clone()).unwrap_or_default());
        }
        rec.push(r.method.clone());
        rec.push(sig6(r.power));
        rec.push(sig6(r.mcse));
        rec.push(r.n_iter.to_string());
        rec.push(r.n_rejections.to_string());
        rec.push(r.n_degenerate.to_string());
        rec.push(r.n_failed.to_string());
        rec.push(opt(r.mean_wr));
        rec.push(opt(r.mean_tie_fraction));
        for k in 0..levels {
            rec.push(opt(r.decided_fractions.get(k).copied()));
        }
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn num(x: f64) -> Json {
    // rounded to the same six significant digits as the CSV
    sig6(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Json::Null, Json::Number)
}

/// JSON mirror of the CSV rows.
pub fn grid_json(results: &[ScenarioResult]) -> Json {
    let rows: Vec<Json> = rows(results)
        .into_iter()
        .map(|r| {
            let factors: Map<String, Json> = r.factors.into_iter().map(|(k, v)| (k, Json::String(v))).collect();
            json!({
                "scenario": r.scenario,
                "factors": factors,
                "method": r.method,
                "power": num(r.power),
                "mcse": num(r.mcse),
                "n_iter": r.n_iter,
                "n_rejections": r.n_rejections,
                "n_degenerate": r.n_degenerate,
                "n_failed": r.n_failed,
                "mean_wr": r.mean_wr.map_or(Json::Null, num),
                "mean_tie_fraction": r.mean_tie_fraction.map_or(Json::Null, num),
                "decided_fractions": r.decided_fractions.into_iter().map(num).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "rows": rows })
}
