//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reram_correct::digits::{bundled_digits, DigitSample};
use reram_correct::experiment::build_baseline;
use reram_correct::mlp::{batch_gradient, cross_entropy_loss};
use reram_correct::{DefectMask, MlpParams, MlpSpec};

pub struct Trained {
    pub digits: Vec<DigitSample>,
    pub params: MlpParams,
    pub test_accuracy: f64,
}

/// The default-seed baseline, trained once per test binary.
pub fn trained() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    CELL.get_or_init(|| {
        let digits = bundled_digits();
        let (params, report) = build_baseline(&digits, 1).expect("baseline trains");
        Trained {
            digits,
            params,
            test_accuracy: report.test_accuracy,
        }
    })
}

/// Software reference for the analog circuit: plain dense layers with the
/// bias as an extra input at 1 V, masked cells forced to zero weight, and a
/// rectifier after every layer including the last.
pub fn masked_reference(params: &MlpParams, mask: Option<(usize, &DefectMask)>, pixels: &[u8]) -> Vec<f64> {
    let mut x: Vec<f64> = pixels.iter().map(|&p| f64::from(p) / 16.0).collect();
    for (k, layer) in params.layers().iter().enumerate() {
        let n_in = layer.n_in();
        let mut y = vec![0.0; layer.n_out()];
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=n_in {
                if let Some((l, m)) = mask {
                    if l == k && m.get(j, i) {
                        continue;
                    }
                }
                let (v, w) = if j < n_in {
                    (x[j], layer.weights.get(j, i))
                } else {
                    (1.0, layer.bias[i])
                };
                acc += v * w;
            }
            *out = acc.max(0.0);
        }
        x = y;
    }
    x
}

/// `max |a - b| <= tol * max(max |b|, floor)`.
pub fn close_inf(a: &[f64], b: &[f64], tol: f64, floor: f64) -> bool {
    let scale = b.iter().fold(floor, |m, v| m.max(v.abs()));
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

/// `max |a - b| / max(max |b|, floor)`.
pub fn rel_inf(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = b.iter().fold(floor, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs() / scale))
}

fn mean_loss(params: &MlpParams, batch: &[(Vec<f64>, usize)]) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|(x, y)| cross_entropy_loss(&params.forward(x).unwrap(), *y).unwrap())
        .sum();
    total / batch.len() as f64
}

fn perturbed(params: &MlpParams, index: usize, delta: f64) -> MlpParams {
    let mut p = params.clone();
    let mut k = 0;
    p.for_each_param_mut(|v| {
        if k == index {
            *v += delta;
        }
        k += 1;
    });
    p
}

/// Worst relative disagreement between backprop and central differences
/// (step 1e-5) over every parameter of a freshly initialised network.
pub fn gradient_check(spec: &MlpSpec, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = MlpParams::init(spec, &mut rng);
    let batch: Vec<(Vec<f64>, usize)> = (0..4)
        .map(|_| {
            let x = (0..spec.input_width).map(|_| rng.gen_range(0.0..2.0)).collect();
            (x, rng.gen_range(0..spec.output_width))
        })
        .collect();
    let (_, grad) = batch_gradient(&params, batch.iter().map(|(x, y)| (x.as_slice(), *y))).unwrap();
    let analytic = grad.flat_params();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let numeric =
            (mean_loss(&perturbed(&params, k, h), &batch) - mean_loss(&perturbed(&params, k, -h), &batch))
                / (2.0 * h);
        let scale = a.abs().max(numeric.abs()).max(1e-3);
        let rel = (a - numeric).abs() / scale;
        worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
    }
    worst
}

