use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use wrlab::rng::Substream;
use wrlab::stats::{chi_square_test, fisher_exact, log_rank_test, t_test, SurvivalSample, TTestVariant, TwoByTwoTable};
use wrlab::Arm;

const ITERS: u64 = 2500;

fn within_three_mcse(rejections: u64, label: &str) {
    let rate = rejections as f64 / ITERS as f64;
    let mcse = (0.05f64 * 0.95 / ITERS as f64).sqrt();
    assert!((rate - 0.05).abs() <= 3.0 * mcse, "{label}: {rate}");
}

#[test]
fn t_test_null_calibration() {
    let s = Substream::new(31);
    for variant in [TTestVariant::Welch, TTestVariant::Pooled] {
        let mut rej = 0;
        for i in 0..ITERS {
            let mut rng = s.rng(&[i]);
            let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
            let x = draw(20);
            let y = draw(20);
            rej += u64::from(t_test(&x, &y, variant).unwrap().p_value <= 0.05);
        }
        within_three_mcse(rej, "t");
    }
}

fn binomial_table(s: &Substream, i: u64, n: u64, p: f64) -> TwoByTwoTable {
    let mut rng = s.rng(&[i]);
    let mut succ = || (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
    let a = succ();
    let c = succ();
    TwoByTwoTable::from_arms(a, n, c, n).unwrap()
}

#[test]
fn chi_square_null_calibration() {
    let s = Substream::new(32);
    let rej =
        (0..ITERS).filter(|&i| chi_square_test(&binomial_table(&s, i, 100, 0.3), false).p_value <= 0.05).count() as u64;
    within_three_mcse(rej, "chi-square");
}

#[test]
fn fisher_exact_is_conservative_at_small_n() {
    // discreteness keeps the exact size well below alpha at 20 per arm
    let s = Substream::new(33);
    let rej = (0..ITERS).filter(|&i| fisher_exact(&binomial_table(&s, i, 20, 0.3)) <= 0.05).count();
    let rate = rej as f64 / ITERS as f64;
    assert!(rate <= 0.05 && rate > 0.01, "{rate}");
}

#[test]
fn log_rank_null_calibration() {
    let s = Substream::new(34);
    let event = Exp::new(1.0 / 500.0).unwrap();
    let censor = Exp::new(1.0 / 1500.0).unwrap();
    let mut rej = 0;
    for i in 0..ITERS {
        let mut rng = s.rng(&[i]);
        let mut sample = SurvivalSample::default();
        for arm in [Arm::Treatment, Arm::Control] {
            for _ in 0..50 {
                let e: f64 = event.sample(&mut rng);
                let c: f64 = censor.sample(&mut rng);
                let c = c.min(730.0);
                sample.push(e.min(c).ceil(), e <= c, arm);
            }
        }
        rej += u64::from(log_rank_test(&sample).unwrap().p_value <= 0.05);
    }
    within_three_mcse(rej, "log-rank");
}

#[test]
fn tests_ignore_patient_order() {
    let x = [3.1, 0.2, 5.5, 2.2, 1.9];
    let y = [1.0, 0.4, 0.3, 2.8];
    let mut xr = x;
    xr.reverse();
    let p1 = t_test(&x, &y, TTestVariant::Welch).unwrap().p_value;
    let p2 = t_test(&xr, &y, TTestVariant::Welch).unwrap().p_value;
    assert!((p1 - p2).abs() < 1e-12);
    let mut s1 = SurvivalSample::default();
    let mut s2 = SurvivalSample::default();
    let data = [
        (5.0, true, Arm::Treatment),
        (3.0, false, Arm::Control),
        (2.0, true, Arm::Control),
        (7.0, true, Arm::Treatment),
    ];
    for &(t, e, a) in &data {
        s1.push(t, e, a);
    }
    for &(t, e, a) in data.iter().rev() {
        s2.push(t, e, a);
    }
    assert_eq!(log_rank_test(&s1).unwrap(), log_rank_test(&s2).unwrap());
}
