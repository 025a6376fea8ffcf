mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{close_inf, masked_reference, trained};
use reram_correct::{Circuit, ConfigKey, DefectKind, DefectSpec, StuckMode};
use reram_correct::crossbar::NUM_LAYERS;

#[test]
fn defect_free_circuit_matches_software() {
    let t = trained();
    let circuit = Circuit::from_params(&t.params).unwrap();
    for d in &t.digits {
        let inf = circuit.forward_inference(&d.pixels).unwrap();
        let reference = masked_reference(&t.params, None, &d.pixels);
        assert!(close_inf(inf.voltages.as_slice(), &reference, 1e-9, 1.0));
        let logits = t.params.logits(&d.normalized()).unwrap();
        if logits.iter().any(|&z| z > 0.0) {
            assert_eq!(inf.prediction, t.params.predict(&d.normalized()).unwrap(), "image {}", d.image_id);
        } else {
            // every class rectified to 0 V; the tie resolves to the first class
            assert!(inf.voltages.as_slice().iter().all(|&v| v == 0.0));
            assert_eq!(inf.prediction, 0);
        }
    }
}

#[test]
fn masked_weight_oracle_on_random_defects() {
    let t = trained();
    let circuit = Circuit::from_params(&t.params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in DefectKind::ALL {
        let sizes = kind.sizes();
        for _ in 0..100 {
            let size = sizes[rng.gen_range(0..sizes.len())];
            let layer = rng.gen_range(0..NUM_LAYERS);
            let mode = if rng.gen_bool(0.5) { StuckMode::StuckOn } else { StuckMode::StuckOff };
            let d = &t.digits[rng.gen_range(0..t.digits.len())];
            let spec = DefectSpec::new(kind, size, layer, mode).unwrap();
            let (faulty, mask) = circuit.with_defect(&spec).unwrap();
            let got = faulty.forward_inference(&d.pixels).unwrap();
            let want = masked_reference(&t.params, Some((layer, &mask)), &d.pixels);
            assert!(
                close_inf(got.voltages.as_slice(), &want, 1e-6, 1.0),
                "{spec:?} image {}: {:?} vs {want:?}",
                d.image_id,
                got.voltages.as_slice()
            );
        }
    }
}

#[test]
fn argmax_is_invariant_to_positive_input_scaling() {
    let t = trained();
    let base = Circuit::from_params(&t.params).unwrap();
    let spec = DefectSpec::new(DefectKind::Ring, Some(2), 1, StuckMode::StuckOff).unwrap();
    let (faulty, _) = base.with_defect(&spec).unwrap();
    for c in [0.25, 2.0, 3.7] {
        for circuit in [&base, &faulty] {
            let scaled = circuit.clone().with_encoding(circuit.encoding().scaled(c));
            for d in t.digits.iter().step_by(3) {
                assert_eq!(
                    circuit.forward_inference(&d.pixels).unwrap().prediction,
                    scaled.forward_inference(&d.pixels).unwrap().prediction
                );
            }
        }
    }
}

#[test]
fn stuck_on_and_stuck_off_agree_exactly() {
    let t = trained();
    let circuit = Circuit::from_params(&t.params).unwrap();
    for key in ConfigKey::all_for(&DefectKind::ALL) {
        for layer in 0..NUM_LAYERS {
            let (on, _) = circuit.with_defect(&key.spec(layer, StuckMode::StuckOn).unwrap()).unwrap();
            let (off, _) = circuit.with_defect(&key.spec(layer, StuckMode::StuckOff).unwrap()).unwrap();
            for d in t.digits.iter().step_by(17) {
                let a = on.forward_inference(&d.pixels).unwrap();
                let b = off.forward_inference(&d.pixels).unwrap();
                assert_eq!(a.voltages, b.voltages, "{key} layer {layer}");
                assert_eq!(a.prediction, b.prediction);
            }
        }
    }
}
