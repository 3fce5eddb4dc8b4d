//! Dataset CSV and hierarchy JSON.
//!
//! CSV layout: `id`, `arm` (`T`/`C`), then per level either `<name>` (scalar
//! kinds) or `time_<name>` and `event_<name>` (1 = event, 0 = censored).
//! Other columns are ignored. Any unparsable cell is an error carrying the
//! line number and column name.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{Arm, Dataset, Hierarchy, OutcomeKind, PatientRecord, Value};

/// Version tag expected in hierarchy config files.
pub const HIERARCHY_SCHEMA: &str = "wrlab.hierarchy.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyConfig {
    pub schema: String,
    pub levels: Hierarchy,
}

pub fn parse_hierarchy_json(text: &str) -> Result<Hierarchy> {
    let cfg: HierarchyConfig =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("hierarchy config: {e}")))?;
    if cfg.schema != HIERARCHY_SCHEMA {
        return Err(Error::invalid(format!(
            "hierarchy config: unsupported schema `{}` (expected `{HIERARCHY_SCHEMA}`)",
            cfg.schema
        )));
    }
    Ok(cfg.levels)
}

pub fn hierarchy_json(h: &Hierarchy) -> String {
    let cfg = HierarchyConfig { schema: HIERARCHY_SCHEMA.into(), levels: h.clone() };
    serde_json::to_string_pretty(&cfg).expect("hierarchy serializes")
}

pub fn read_hierarchy(path: &Path) -> Result<Hierarchy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_hierarchy_json(&text)
}

enum Column {
    Scalar(usize),
    Event { time: usize, event: usize },
}

fn find(headers: &csv::StringRecord, name: &str, context: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Parse {
        context: context.into(),
        line: 1,
        column: name.into(),
        message: "required column missing from header".into(),
    })
}

/// Reads a dataset; `context` names the source in diagnostics.
pub fn read_dataset<R: Read>(reader: R, hierarchy: &Hierarchy, context: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(context, 1, "", &e.to_string()))?.clone();
    let id_col = find(&headers, "id", context)?;
    let arm_col = find(&headers, "arm", context)?;
    let mut columns = Vec::with_capacity(hierarchy.len());
    for spec in hierarchy.levels() {
        columns.push(match spec.kind {
            OutcomeKind::TimeToEvent => Column::Event {
                time: find(&headers, &format!("time_{}", spec.name), context)?,
                event: find(&headers, &format!("event_{}", spec.name), context)?,
            },
            _ => Column::Scalar(find(&headers, &spec.name, context)?),
        });
    }

    let mut patients = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(context, line, "", &e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(i).unwrap_or("").trim();
        let id = cell(id_col).to_string();
        if id.is_empty() {
            return Err(parse_err(context, line, "id", "empty id"));
        }
        if !seen.insert(id.clone()) {
            return Err(parse_err(context, line, "id", &format!("duplicate id `{id}`")));
        }
        let arm = match cell(arm_col) {
            "T" => Arm::Treatment,
            "C" => Arm::Control,
            other => return Err(parse_err(context, line, "arm", &format!("expected `T` or `C`, got `{other}`"))),
        };
        let mut values = Vec::with_capacity(columns.len());
        for (spec, col) in hierarchy.levels().iter().zip(&columns) {
            let value = match *col {
                Column::Scalar(i) => Value::Scalar(parse_number(cell(i), context, line, &headers[i])?),
                Column::Event { time, event } => {
                    let t = parse_number(cell(time), context, line, &headers[time])?;
                    let e = match cell(event) {
                        "1" => true,
                        "0" => false,
                        other => {
                            return Err(parse_err(
                                context,
                                line,
                                &headers[event],
                                &format!("event indicator must be 0 or 1, got `{other}`"),
                            ))
                        }
                    };
                    Value::event(t, e)
                }
            };
            let column = match *col {
                Column::Scalar(i) => &headers[i],
                Column::Event { time, .. } => &headers[time],
            };
            value.conforms(spec).map_err(|e| parse_err(context, line, column, &e.to_string()))?;
            values.push(value);
        }
        patients.push(PatientRecord::new(id, arm, values));
    }
    Dataset::new(hierarchy.clone(), patients)
}

pub fn read_dataset_path(path: &Path, hierarchy: &Hierarchy) -> Result<Dataset> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_dataset(f, hierarchy, &path.display().to_string())
}

fn parse_err(context: &str, line: u64, column: &str, message: &str) -> Error {
    Error::Parse { context: context.into(), line, column: column.into(), message: message.into() }
}

fn parse_number(s: &str, context: &str, line: u64, column: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(context, line, column, &format!("expected a finite number, got `{s}`"))),
    }
}

/// Writes a dataset in the layout `read_dataset` accepts. Numbers use the
/// shortest representation that reads back exactly.
pub fn write_dataset<W: Write>(writer: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "arm".to_string()];
    for spec in dataset.hierarchy.levels() {
        if spec.kind == OutcomeKind::TimeToEvent {
            header.push(format!("time_{}", spec.name));
            header.push(format!("event_{}", spec.name));
        } else {
            header.push(spec.name.clone());
        }
    }
    w.write_record(&header).map_err(csv_io_err)?;
    for p in &dataset.patients {
        let mut row = vec![p.id.clone(), p.arm.label().to_string()];
        for v in &p.values {
            match *v {
                Value::Scalar(x) => row.push(x.to_string()),
                Value::Event { time, event } => {
                    row.push(time.to_string());
                    row.push(if event { "1" } else { "0" }.to_string());
                }
            }
        }
        w.write_record(&row).map_err(csv_io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
