//! Composite-endpoint description and patient data.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    TimeToEvent,
    Continuous,
    Binary,
    Count,
}

/// Which end of the outcome scale is better for the patient.
///
/// For time-to-event outcomes `HigherFavorable` means a later (or absent)
/// event is better, which is the usual reading for death or hospitalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherFavorable,
    LowerFavorable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    #[serde(rename = "T")]
    Treatment,
    #[serde(rename = "C")]
    Control,
}

impl Arm {
    pub fn flipped(self) -> Arm {
        match self {
            Arm::Treatment => Arm::Control,
            Arm::Control => Arm::Treatment,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Arm::Treatment => "T",
            Arm::Control => "C",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One level of a hierarchical composite endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSpec {
    pub name: String,
    pub kind: OutcomeKind,
    pub direction: Direction,
    /// Minimum difference (in outcome units) needed to declare a win or loss.
    #[serde(default)]
    pub margin: f64,
}

impl OutcomeSpec {
    pub fn new(name: impl Into<String>, kind: OutcomeKind, direction: Direction) -> Self {
        Self { name: name.into(), kind, direction, margin: 0.0 }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::invalid("outcome name is empty"));
        }
        if !self.margin.is_finite() || self.margin < 0.0 {
            return Err(Error::invalid(format!(
                "margin of `{}` must be finite and nonnegative, got {}",
                self.name, self.margin
            )));
        }
        if self.kind == OutcomeKind::Binary && self.margin != 0.0 {
            return Err(Error::invalid(format!("binary outcome `{}` cannot carry a margin", self.name)));
        }
        Ok(())
    }
}

/// Ordered outcome levels, highest-ranked first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<OutcomeSpec>", into = "Vec<OutcomeSpec>")]
pub struct Hierarchy {
    levels: Vec<OutcomeSpec>,
}

impl Hierarchy {
    pub fn new(levels: Vec<OutcomeSpec>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("hierarchy needs at least one level"));
        }
        let mut seen = HashSet::new();
        for l in &levels {
            l.validate()?;
            if !seen.insert(l.name.as_str()) {
                return Err(Error::invalid(format!("duplicate level name `{}`", l.name)));
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[OutcomeSpec] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl TryFrom<Vec<OutcomeSpec>> for Hierarchy {
    type Error = Error;
    fn try_from(v: Vec<OutcomeSpec>) -> Result<Self> {
        Hierarchy::new(v)
    }
}

impl From<Hierarchy> for Vec<OutcomeSpec> {
    fn from(h: Hierarchy) -> Self {
        h.levels
    }
}

/// Value of one hierarchy level for one patient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    /// Continuous, binary (0/1) or count value.
    Scalar(f64),
    /// Observation time; `event = false` means right-censored at `time`.
    Event { time: f64, event: bool },
}

impl Value {
    pub fn event(time: f64, event: bool) -> Self {
        Value::Event { time, event }
    }

    /// Checks the value against the level's kind.
    pub fn conforms(&self, spec: &OutcomeSpec) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(format!("level `{}`: {msg}", spec.name)));
        match (*self, spec.kind) {
            (Value::Event { time, .. }, OutcomeKind::TimeToEvent) => {
                if !time.is_finite() {
                    bad(format!("non-finite time {time}"))
                } else if time < 0.0 {
                    bad(format!("negative time {time}"))
                } else {
                    Ok(())
                }
            }
            (Value::Scalar(x), kind) if kind != OutcomeKind::TimeToEvent => {
                if !x.is_finite() {
                    return bad(format!("non-finite value {x}"));
                }
                match kind {
                    OutcomeKind::Binary if x != 0.0 && x != 1.0 => bad(format!("binary value must be 0 or 1, got {x}")),
                    OutcomeKind::Count if x < 0.0 || x.fract() != 0.0 => {
                        bad(format!("count must be a nonnegative integer, got {x}"))
                    }
                    _ => Ok(()),
                }
            }
            (Value::Event { .. }, _) => bad("expected a single value, got (time, event)".into()),
            (Value::Scalar(_), _) => bad("expected (time, event), got a single value".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: String,
    pub arm: Arm,
    pub values: Vec<Value>,
}

impl PatientRecord {
    pub fn new(id: impl Into<String>, arm: Arm, values: Vec<Value>) -> Self {
        Self { id: id.into(), arm, values }
    }

    pub fn conforms(&self, h: &Hierarchy) -> Result<()> {
        if self.values.len() != h.len() {
            return Err(Error::invalid(format!(
                "patient `{}` has {} values for a {}-level hierarchy",
                self.id,
                self.values.len(),
                h.len()
            )));
        }
        for (v, spec) in self.values.iter().zip(h.levels()) {
            v.conforms(spec).map_err(|e| Error::invalid(format!("patient `{}`: {e}", self.id)))?;
        }
        Ok(())
    }
}

/// Patients of both arms described by a common hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub hierarchy: Hierarchy,
    pub patients: Vec<PatientRecord>,
}

impl Dataset {
    pub fn new(hierarchy: Hierarchy, patients: Vec<PatientRecord>) -> Result<Self> {
        for p in &patients {
            p.conforms(&hierarchy)?;
        }
        Ok(Self { hierarchy, patients })
    }

    pub fn arm(&self, arm: Arm) -> impl Iterator<Item = &PatientRecord> {
        self.patients.iter().filter(move |p| p.arm == arm)
    }

    pub fn arm_sizes(&self) -> (usize, usize) {
        let n_t = self.arm(Arm::Treatment).count();
        (n_t, self.patients.len() - n_t)
    }

    /// Same patients with treatment and control labels exchanged.
    pub fn with_arms_swapped(&self) -> Dataset {
        Dataset {
            hierarchy: self.hierarchy.clone(),
            patients: self.patients.iter().map(|p| PatientRecord { arm: p.arm.flipped(), ..p.clone() }).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hierarchy_rejects_empty_and_duplicates() {
        assert!(Hierarchy::new(vec![]).is_err());
        let a = OutcomeSpec::new("a", OutcomeKind::Continuous, Direction::LowerFavorable);
        assert!(Hierarchy::new(vec![a.clone(), a]).is_err());
    }

    #[test]
    fn margin_rules() {
        let b = OutcomeSpec::new("b", OutcomeKind::Binary, Direction::LowerFavorable).with_margin(0.5);
        assert!(b.validate().is_err());
        let c = OutcomeSpec::new("c", OutcomeKind::Continuous, Direction::LowerFavorable).with_margin(-1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn value_conformance() {
        let tte = OutcomeSpec::new("d", OutcomeKind::TimeToEvent, Direction::HigherFavorable);
        let bin = OutcomeSpec::new("b", OutcomeKind::Binary, Direction::LowerFavorable);
        let cnt = OutcomeSpec::new("n", OutcomeKind::Count, Direction::LowerFavorable);
        assert!(Value::event(3.0, true).conforms(&tte).is_ok());
        assert!(Value::event(-3.0, true).conforms(&tte).is_err());
        assert!(Value::event(f64::INFINITY, false).conforms(&tte).is_err());
        assert!(Value::Scalar(1.0).conforms(&tte).is_err());
        assert!(Value::Scalar(2.0).conforms(&bin).is_err());
        assert!(Value::Scalar(1.5).conforms(&cnt).is_err());
        assert!(Value::Scalar(f64::NAN).conforms(&cnt).is_err());
        assert!(Value::event(1.0, true).conforms(&bin).is_err());
    }

    #[test]
    fn hierarchy_json_round_trip() {
        let h = Hierarchy::new(vec![
            OutcomeSpec::new("death", OutcomeKind::TimeToEvent, Direction::HigherFavorable),
            OutcomeSpec::new("ae", OutcomeKind::Count, Direction::LowerFavorable).with_margin(1.0),
        ])
        .unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.contains("time-to-event") && s.contains("lower-favorable"));
        let back: Hierarchy = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        assert!(serde_json::from_str::<Hierarchy>("[]").is_err());
    }
}
