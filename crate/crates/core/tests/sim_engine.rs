use wrlab::sim::{
    binary_continuous_grid, grid_json, preset, run_grid, run_scenario, ttfe_weibull_plan, write_grid_csv, Dgm,
    HierarchyOrder, Method, Scenario, WrTest,
};
use wrlab::stats::TTestVariant;

fn bc(p_t: f64, delta: f64, order: HierarchyOrder) -> Scenario {
    Scenario::new(
        Dgm::BinaryContinuous { n_per_arm: 20, p_soc: 0.3, p_t, delta, sd: 1.0, order },
        vec![Method::WR_YU, Method::TTest { variant: TTestVariant::Welch }],
    )
}

#[test]
fn grid_output_is_byte_identical_across_runs_and_threads() {
    let grid: Vec<Scenario> = binary_continuous_grid().into_iter().step_by(7).collect();
    let csv = |threads: usize| {
        let res = wrlab::par::with_threads(threads, || run_grid(&grid, 100, 123).unwrap());
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &res).unwrap();
        (buf, grid_json(&res).to_string())
    };
    let a = csv(0);
    assert_eq!(a, csv(1));
    assert_eq!(a, csv(3));
}

#[test]
fn continuous_first_decisions_sit_at_level_one() {
    let r = run_scenario(&bc(0.7, 0.1, HierarchyOrder::ContinuousFirst), 300, 5).unwrap();
    let fr = r.methods[0].decided_fractions().unwrap();
    assert!(fr[0] > 0.99, "{fr:?}");
}

#[test]
fn wr_power_monotone_in_effect() {
    let power =
        |p_t, delta| run_scenario(&bc(p_t, delta, HierarchyOrder::BinaryFirst), 1000, 6).unwrap().methods[0].power;
    for p_t in [0.35, 0.5, 0.7] {
        let mut prev = power(p_t, 0.1);
        for delta in [0.5, 1.0] {
            let cur = power(p_t, delta);
            assert!(cur.power + 2.0 * cur.mcse >= prev.power, "p_t {p_t} delta {delta}");
            prev = cur;
        }
    }
    for delta in [0.1, 0.75] {
        let mut prev = power(0.35, delta);
        for p_t in [0.5, 0.7] {
            let cur = power(p_t, delta);
            assert!(cur.power + 2.0 * cur.mcse >= prev.power, "p_t {p_t} delta {delta}");
            prev = cur;
        }
    }
}

#[test]
fn tte_null_cell_calibrates() {
    let s = Scenario::new(
        Dgm::TteComposite { n_per_arm: 105, plan: ttfe_weibull_plan(1.0, 1.0).unwrap() },
        vec![Method::WR_YU, Method::LogRankTtfe],
    );
    let r = run_scenario(&s, 2500, 7).unwrap();
    for m in &r.methods {
        assert!((m.power.power - 0.05).abs() <= 3.0 * 0.0044, "{} {}", m.label, m.power.power);
        assert_eq!(m.n_failed, 0);
    }
}

#[test]
fn bootstrap_wr_null_calibration() {
    let mut s = bc(0.3, 0.0, HierarchyOrder::BinaryFirst);
    s.methods = vec![Method::WinRatio { test: WrTest::Bootstrap { b: 500 } }];
    let r = run_scenario(&s, 2500, 8).unwrap();
    let p = r.methods[0].power;
    assert!((p.power - 0.05).abs() <= 3.0 * 0.0044, "{p:?}");
}

#[test]
fn presets_report_no_failures() {
    for name in ["iphak", "ttfe-weibull", "binary-continuous"] {
        let preset = preset(name).unwrap();
        for s in preset.grid.iter().take(3) {
            let r = run_scenario(s, 20, 9).unwrap();
            assert_eq!(r.n_generation_failures, 0);
            for m in &r.methods {
                assert_eq!(m.n_failed, 0, "{name} {}", m.label);
            }
        }
    }
}
