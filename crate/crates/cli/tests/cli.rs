use std::path::{Path, PathBuf};
use std::process::{Command, Output};

#[path = "../../core/tests/common/mod.rs"]
mod common;

use wrlab::csv_io::{read_dataset_path, read_hierarchy};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn fixture(name: &str) -> String {
    root().join("tests/fixtures").join(name).display().to_string()
}

fn data(name: &str) -> String {
    root().join("data").join(name).display().to_string()
}

fn wrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wrlab")).args(args).env_remove("WRLAB_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value column of the `analyze` report for `section,quantity`.
fn report_value(report: &str, section: &str, quantity: &str) -> String {
    let key = format!("{section},{quantity},");
    report.lines().find_map(|l| l.strip_prefix(&key)).unwrap_or_else(|| panic!("no {key} in report")).to_string()
}

#[test]
fn mirrored_fixture_has_unit_win_ratio() {
    let o = wrlab(&["analyze", &fixture("two_per_arm.csv"), "--hierarchy", &fixture("score_hierarchy.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout(&o);
    assert_eq!(report_value(&r, "estimate", "win_ratio"), "1");
    assert_eq!(report_value(&r, "tally", "n_win"), "2");
    assert_eq!(report_value(&r, "tally", "n_loss"), "2");
}

#[test]
fn bad_event_value_exits_2_with_location() {
    let o = wrlab(&["analyze", &fixture("bad_event.csv"), "--hierarchy", &fixture("tte_hierarchy.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("event_death") && err.contains("`2`"), "{err}");
}

#[test]
fn missing_hierarchy_is_usage_error() {
    let o = wrlab(&["analyze", &fixture("two_per_arm.csv")]);
    assert_eq!(o.status.code(), Some(2));
    let o = wrlab(&["analyze", "no/such.csv", "--hierarchy", &fixture("score_hierarchy.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_report_matches_golden_file() {
    let (csv, json) = (data("iphak_sample.csv"), data("iphak_hierarchy.json"));
    let o = wrlab(&["analyze", &csv, "--hierarchy", &json]);
    assert!(o.status.success());
    let got = stdout(&o);
    let golden = std::fs::read_to_string(root().join("tests/golden/iphak_sample_analyze.csv")).unwrap();
    assert_eq!(got, golden);

    // the committed counts must agree with a brute-force tally
    let h = read_hierarchy(Path::new(&json)).unwrap();
    let d = read_dataset_path(Path::new(&csv), &h).unwrap();
    let (w, l, t, per_level) = common::naive_tally(&d);
    assert_eq!(report_value(&golden, "tally", "n_win"), w.to_string());
    assert_eq!(report_value(&golden, "tally", "n_loss"), l.to_string());
    assert_eq!(report_value(&golden, "tally", "n_tie"), t.to_string());
    assert_eq!(report_value(&golden, "level:ebp", "decided"), per_level[0].to_string());
    assert_eq!(report_value(&golden, "level:ddd_change", "decided"), per_level[1].to_string());
}

#[test]
fn analyze_json_has_same_content() {
    let o = wrlab(&[
        "analyze",
        &fixture("two_per_arm.csv"),
        "--config",
        &fixture("score_hierarchy.json"),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let wr = v.as_array().unwrap().iter().find(|r| r["quantity"] == "win_ratio").unwrap();
    assert_eq!(wr["value"], 1.0);
}

#[test]
fn precision_sample_size_is_67_per_group() {
    let o = wrlab(&["samplesize", "precision", "--width", "0.8", "--p-tie", "0.02"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(row.ends_with(",134,67,67"), "{row}");
}

#[test]
fn weibull_calibration() {
    let o = wrlab(&["calibrate", "weibull", "--time", "730", "--survival", "0.7", "--shape", "4"]);
    assert_eq!(stdout(&o), "distribution,time,target,shape,scale\nweibull,730,0.7,4,944.615\n");
    let o = wrlab(&["calibrate", "exponential", "--time", "730", "--dropout", "0.1"]);
    assert!(stdout(&o).ends_with(",6928.59\n"));
}

#[test]
fn yu_power_grid_is_long_format() {
    let o = wrlab(&["power", "yu", "--wr", "1.2,1.5", "--n", "100,200", "--p-tie", "0,0.2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 8);
}

#[test]
fn mao_from_pilot_and_explicit_inputs() {
    let o = wrlab(&["samplesize", "mao", "--wr", "1.5", "--pilot", &fixture("pilot.csv")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = wrlab(&["power", "mao", "--wr", "1.5", "--n", "200"]);
    assert_eq!(o.status.code(), Some(2), "needs ξ₀² and W₀ or a pilot file");
    let o = wrlab(&["power", "mao", "--wr", "1.5", "--n", "200", "--xi0-sq", "0.3333333", "--w0", "0.5"]);
    assert!(o.status.success());
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        vec!["samplesize", "yu", "--wr", "1"],
        vec!["samplesize", "precision", "--width", "-1"],
        vec!["calibrate", "weibull", "--time", "730", "--survival", "1.5", "--shape", "2"],
        vec!["simulate", "--preset", "nope"],
        vec!["simulate"],
        vec!["--alpha", "2", "calibrate", "exponential", "--time", "1", "--dropout", "0.1"],
        vec!["frobnicate"],
    ] {
        let o = wrlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn simulate_is_deterministic_given_seed() {
    let args = ["simulate", "--preset", "binary-continuous", "--iterations", "10", "--seed", "1"];
    let a = wrlab(&args);
    let b = wrlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 150);
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = fixture("small_grid.json");
    let base = wrlab(&["simulate", "--config", &cfg, "--format", "json"]);
    let one = Command::new(env!("CARGO_BIN_EXE_wrlab"))
        .args(["simulate", "--config", &cfg, "--format", "json"])
        .env("WRLAB_THREADS", "1")
        .output()
        .unwrap();
    let three = wrlab(&["simulate", "--config", &cfg, "--format", "json", "--threads", "3"]);
    assert_eq!(base.stdout, one.stdout);
    assert_eq!(base.stdout, three.stdout);
    let v: serde_json::Value = serde_json::from_slice(&base.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn config_seed_is_overridden_by_flag() {
    let cfg = fixture("small_grid.json");
    let a = wrlab(&["simulate", "--config", &cfg]);
    let b = wrlab(&["simulate", "--config", &cfg, "--seed", "11"]);
    let c = wrlab(&["simulate", "--config", &cfg, "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn ranksim_from_config_with_overrides() {
    let o = wrlab(&["ranksim", "--config", &fixture("ranksim.json"), "--iterations", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..3], ["30", "30", "0.6"]);
    assert_eq!(row[9], "20");
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("wrlab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cal.json");
    let o = wrlab(&[
        "calibrate",
        "exponential",
        "--time",
        "730",
        "--dropout",
        "0.1",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v[0]["scale"], 6928.59);
    std::fs::remove_dir_all(dir).unwrap();
}
