use wrlab::design::{yu_power, Sidedness};
use wrlab::inference::win_ratio;
use wrlab::ranksim::{ranksim_power, simulate_rank_trial, RankSimConfig};
use wrlab::rng::Substream;
use wrlab::{tally_unmatched, Arm, Value};

fn config(phi: f64, n: usize) -> RankSimConfig {
    RankSimConfig { n_t: n, n_c: n, phi_win: vec![phi], ..Default::default() }
}

#[test]
fn null_top_half_share() {
    let cfg = config(0.5, 50);
    let s = Substream::new(40);
    let reps = 10_000u64;
    let mut share = 0.0;
    for r in 0..reps {
        let d = simulate_rank_trial(&cfg, &mut s.rng(&[r])).unwrap();
        let top = d.arm(Arm::Treatment).filter(|p| matches!(p.values[0], Value::Scalar(x) if x <= 50.0)).count();
        share += top as f64 / 50.0;
    }
    assert!((share / reps as f64 - 0.5).abs() < 0.015);
}

#[test]
fn wr_increases_with_phi() {
    let s = Substream::new(41);
    let mut means = Vec::new();
    for (k, phi) in [0.5, 0.55, 0.6].into_iter().enumerate() {
        let cfg = config(phi, 50);
        let reps = 10_000u64;
        let mut sum = 0.0;
        for r in 0..reps {
            let d = simulate_rank_trial(&cfg, &mut s.rng(&[k as u64, r])).unwrap();
            sum += win_ratio(&tally_unmatched(&d).unwrap()).unwrap().ln();
        }
        means.push(sum / reps as f64);
    }
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
    assert!(means[0].abs() < 0.01);
}

#[test]
fn null_calibration_at_one_percent() {
    let cfg = RankSimConfig { alpha: 0.01, ..config(0.5, 50) };
    let r = ranksim_power(&cfg).unwrap();
    let mcse = (0.01f64 * 0.99 / r.n_iterations as f64).sqrt();
    assert!((r.power - 0.01).abs() <= 3.0 * mcse, "{r:?}");
}

#[test]
fn power_increases_with_sample_size() {
    let small = ranksim_power(&RankSimConfig { n_iterations: 400, n_bootstrap: 200, ..config(0.6, 30) }).unwrap();
    let large = ranksim_power(&RankSimConfig { n_iterations: 400, n_bootstrap: 200, ..config(0.6, 90) }).unwrap();
    assert!(large.power > small.power + 2.0 * (small.mcse + large.mcse), "{small:?} {large:?}");
}

#[test]
fn agrees_with_yu_at_two_hundred() {
    let r = ranksim_power(&config(0.6, 100)).unwrap();
    let yu = yu_power(1.5, 200.0, 0.5, 0.0, 0.05, Sidedness::TwoSided).unwrap();
    assert!((r.power - yu).abs() <= 0.05, "ranksim {} vs yu {yu}", r.power);
}

#[test]
fn two_level_ties_are_broken_at_level_two() {
    let cfg = RankSimConfig { phi_win: vec![0.5, 0.7], tie_prob_level1: 0.6, ..config(0.5, 40) };
    let d = simulate_rank_trial(&cfg, &mut Substream::new(42).rng(&[])).unwrap();
    let s = tally_unmatched(&d).unwrap();
    assert!(s.decided_at_level[1] > 0);
}
