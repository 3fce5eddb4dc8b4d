#![allow(dead_code)]

use rand::Rng;
use wrlab::rng::SimRng;
use wrlab::{Arm, Dataset, Direction, Hierarchy, OutcomeKind, OutcomeSpec, PatientRecord, Value};

/// Brute-force tally written from the comparison rules alone: returns
/// (wins, losses, ties, decided per level).
pub fn naive_tally(d: &Dataset) -> (u64, u64, u64, Vec<u64>) {
    let levels = d.hierarchy.levels();
    let mut wins = 0;
    let mut losses = 0;
    let mut ties = 0;
    let mut per_level = vec![0u64; levels.len()];
    for t in d.patients.iter().filter(|p| p.arm == Arm::Treatment) {
        for c in d.patients.iter().filter(|p| p.arm == Arm::Control) {
            let mut outcome = 0i32;
            for (k, spec) in levels.iter().enumerate() {
                outcome = naive_level(&t.values[k], &c.values[k], spec);
                if outcome != 0 {
                    per_level[k] += 1;
                    break;
                }
            }
            match outcome {
                1 => wins += 1,
                -1 => losses += 1,
                _ => ties += 1,
            }
        }
    }
    (wins, losses, ties, per_level)
}

/// +1 treatment better, −1 control better, 0 tie.
fn naive_level(a: &Value, b: &Value, spec: &OutcomeSpec) -> i32 {
    let m = spec.margin;
    let sign = if spec.direction == Direction::HigherFavorable { 1.0 } else { -1.0 };
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => {
            let d = sign * (x - y);
            if d > m {
                1
            } else if -d > m {
                -1
            } else {
                0
            }
        }
        (Value::Event { time: ta, event: ea }, Value::Event { time: tb, event: eb }) => {
            // the patient whose event is observed first, with the other still
            // observed beyond it (plus margin), had the event earlier
            let a_first = *ea && *tb > *ta + m;
            let b_first = *eb && *ta > *tb + m;
            let r = if b_first {
                1
            } else if a_first {
                -1
            } else {
                0
            };
            if spec.direction == Direction::HigherFavorable {
                r
            } else {
                -r
            }
        }
        _ => panic!("kind mismatch"),
    }
}

fn random_spec(rng: &mut SimRng, k: usize) -> OutcomeSpec {
    let kind = match rng.random_range(0..4) {
        0 => OutcomeKind::TimeToEvent,
        1 => OutcomeKind::Continuous,
        2 => OutcomeKind::Binary,
        _ => OutcomeKind::Count,
    };
    let direction = if rng.random_bool(0.5) { Direction::HigherFavorable } else { Direction::LowerFavorable };
    let margin =
        if kind == OutcomeKind::Binary || rng.random_bool(0.5) { 0.0 } else { f64::from(rng.random_range(0..3u8)) };
    OutcomeSpec::new(format!("l{k}"), kind, direction).with_margin(margin)
}

fn random_value(rng: &mut SimRng, spec: &OutcomeSpec) -> Value {
    match spec.kind {
        // coarse grids so ties and exact-margin boundaries actually occur
        OutcomeKind::TimeToEvent => Value::event(f64::from(rng.random_range(0..8u8)), rng.random_bool(0.6)),
        OutcomeKind::Continuous => Value::Scalar(f64::from(rng.random_range(-6..6i8)) * 0.5),
        OutcomeKind::Binary => Value::Scalar(f64::from(rng.random_range(0..2u8))),
        OutcomeKind::Count => Value::Scalar(f64::from(rng.random_range(0..5u8))),
    }
}

/// Small dataset (1..=10 per arm, 1..=3 levels of any kind).
pub fn random_dataset(rng: &mut SimRng) -> Dataset {
    let levels = rng.random_range(1..=3);
    let h = Hierarchy::new((0..levels).map(|k| random_spec(rng, k)).collect()).unwrap();
    let n_t = rng.random_range(1..=10);
    let n_c = rng.random_range(1..=10);
    let mut patients = Vec::new();
    for (arm, n) in [(Arm::Treatment, n_t), (Arm::Control, n_c)] {
        for i in 0..n {
            let values = h.levels().iter().map(|s| random_value(rng, s)).collect();
            patients.push(PatientRecord::new(format!("{arm}{i}"), arm, values));
        }
    }
    Dataset::new(h, patients).unwrap()
}

pub fn continuous_dataset(t: &[f64], c: &[f64], direction: Direction) -> Dataset {
    let h = Hierarchy::new(vec![OutcomeSpec::new("y", OutcomeKind::Continuous, direction)]).unwrap();
    let mut patients = Vec::new();
    for (i, &v) in t.iter().enumerate() {
        patients.push(PatientRecord::new(format!("t{i}"), Arm::Treatment, vec![Value::Scalar(v)]));
    }
    for (i, &v) in c.iter().enumerate() {
        patients.push(PatientRecord::new(format!("c{i}"), Arm::Control, vec![Value::Scalar(v)]));
    }
    Dataset::new(h, patients).unwrap()
}
