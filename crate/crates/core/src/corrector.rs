//! Corrective networks: small MLPs mapping the 10 rectified output voltages
//! of a faulty circuit to the digit class.

use crate::corpus::FaultySample;
use crate::error::{Error, Result};
use crate::mlp::{MlpParams, MlpSpec};
use crate::train::{train, LabeledSet, Optimizer, TrainConfig, TrainOutcome};

pub const CORRECTOR_INPUTS: usize = 10;

/// Training defaults for correctors. Inputs are fed as raw volts.
pub fn default_corrector_config(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 3e-3,
        epochs: 300,
        batch_size: 32,
        rng_seed: seed,
        optimizer: Optimizer::Adam,
        patience: Some(30),
    }
}

pub fn samples_to_set<'a>(samples: impl IntoIterator<Item = &'a FaultySample>) -> LabeledSet {
    let mut s = LabeledSet::new(CORRECTOR_INPUTS);
    for f in samples {
        s.push(&f.voltages, usize::from(f.true_label))
            .expect("faulty samples carry 10 voltages");
    }
    s
}

/// Trains a corrector on `samples`, selecting the epoch with the best
/// accuracy on `validation`.
pub fn train_corrector(
    spec: &MlpSpec,
    samples: &[&FaultySample],
    validation: &[&FaultySample],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if spec.input_width != CORRECTOR_INPUTS || spec.output_width != 10 {
        return Err(Error::Config(format!(
            "corrector must map 10 voltages to 10 classes, got {spec}"
        )));
    }
    let train_set = samples_to_set(samples.iter().copied());
    let val_set = samples_to_set(validation.iter().copied());
    train(spec, &train_set, Some(&val_set), config)
}

/// Corrected predictions for a set of samples.
pub fn correct(params: &MlpParams, samples: &[&FaultySample]) -> Result<Vec<usize>> {
    samples.iter().map(|s| params.predict(&s.voltages)).collect()
}
