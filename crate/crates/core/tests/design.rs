use rand::Rng;
use wrlab::design::{mao_power, mao_xi0_from_pilot, yu_power, MaoInputs, Sidedness};
use wrlab::rng::Substream;

#[test]
fn large_tie_free_pilot_approaches_uniform_limits() {
    let mut rng = Substream::new(10).rng(&[]);
    let sample: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
    let est = mao_xi0_from_pilot(&sample).unwrap();
    assert!((est.xi0_sq - 1.0 / 3.0).abs() < 0.01);
    assert!((est.w0 - 0.5).abs() < 0.01);
    assert!(!est.degenerate);
}

#[test]
fn pilot_plug_in_reproduces_yu_power() {
    let mut rng = Substream::new(11).rng(&[]);
    let sample: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
    let est = mao_xi0_from_pilot(&sample).unwrap();
    let inp = MaoInputs { xi0_sq: est.xi0_sq, w0: est.w0, p_c: 0.5 };
    let mao = mao_power(&inp, 1.5, 250.0, 0.05, Sidedness::TwoSided).unwrap();
    let yu = yu_power(1.5, 250.0, 0.5, 0.0, 0.05, Sidedness::TwoSided).unwrap();
    assert!((mao - yu).abs() < 0.01);
}
