mod common;

use common::gradient_check;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reram_correct::device::{conductance_at, G_OFF, G_ON};
use reram_correct::mlp::CORRECTOR_LADDER;
use reram_correct::{MlpParams, MlpSpec};

#[test]
fn gradient_check_every_ladder_architecture() {
    for (k, entry) in CORRECTOR_LADDER.iter().enumerate() {
        let worst = gradient_check(&entry.spec(), 100 + k as u64);
        assert!(worst <= 1e-4, "{}: {worst}", entry.spec());
    }
}

#[test]
fn gradient_check_baseline() {
    assert!(gradient_check(&MlpSpec::baseline(), 7) <= 1e-4);
}

#[test]
fn softmax_sums_to_one_on_random_forwards() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let nets: Vec<MlpParams> = CORRECTOR_LADDER
        .iter()
        .map(|e| MlpParams::init(&e.spec(), &mut rng))
        .collect();
    for n in 0..10_000 {
        let net = &nets[n % nets.len()];
        let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let p = net.forward(&x).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "sum {sum}");
        assert!(p.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn device_curve_anchors_and_sweep() {
    assert_eq!(conductance_at(0.2).unwrap().siemens(), G_ON);
    assert_eq!(conductance_at(1.7).unwrap().siemens(), G_OFF);
    let sweep: Vec<f64> = (0..100)
        .map(|k| conductance_at(0.2 + 1.5 * k as f64 / 99.0).unwrap().siemens())
        .collect();
    assert!(sweep.windows(2).all(|w| w[1] < w[0]));
    assert!(sweep.iter().all(|&g| (G_OFF..=G_ON).contains(&g)));
}
