//! Mini-batch training of [`MlpParams`] with seeded determinism.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{accumulate_gradient, MlpParams, MlpSpec, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub rng_seed: u64,
    pub optimizer: Optimizer,
    /// Stop after this many epochs without validation improvement.
    #[serde(default)]
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-3,
            epochs: 200,
            batch_size: 32,
            rng_seed: 0,
            optimizer: Optimizer::Adam,
            patience: Some(25),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Feature vectors of equal width with class labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledSet {
    width: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl LabeledSet {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &[f64], label: usize) -> Result<()> {
        if x.len() != self.width {
            return Err(Error::shape("labeled sample", self.width, x.len()));
        }
        self.features.extend_from_slice(x);
        self.labels.push(label);
        Ok(())
    }

    pub fn from_pairs<'a>(
        width: usize,
        pairs: impl IntoIterator<Item = (&'a [f64], usize)>,
    ) -> Result<Self> {
        let mut s = Self::new(width);
        for (x, y) in pairs {
            s.push(x, y)?;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn x(&self, k: usize) -> &[f64] {
        &self.features[k * self.width..(k + 1) * self.width]
    }

    pub fn y(&self, k: usize) -> usize {
        self.labels[k]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> + '_ {
        (0..self.len()).map(move |k| (self.x(k), self.y(k)))
    }
}

/// Fraction of samples whose argmax prediction equals the label.
pub fn evaluate_accuracy(params: &MlpParams, data: &LabeledSet) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let mut correct = 0usize;
    for (x, y) in data.iter() {
        if params.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: MlpParams,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub final_loss: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut MlpParams, grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let mut k = 0;
        let (m, v) = (&mut self.m, &mut self.v);
        params.for_each_param_mut(|p| {
            let g = grad[k];
            m[k] = Self::BETA1 * m[k] + (1.0 - Self::BETA1) * g;
            v[k] = Self::BETA2 * v[k] + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + Self::EPS);
            k += 1;
        });
    }
}

/// Trains `spec` on `train` by mini-batch gradient descent on the
/// cross-entropy loss.
///
/// When `validation` is given the parameters with the best validation
/// accuracy are returned and `patience` enables early stopping.
pub fn train(
    spec: &MlpSpec,
    train: &LabeledSet,
    validation: Option<&LabeledSet>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    spec.validate()?;
    if train.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if train.width() != spec.input_width {
        return Err(Error::shape("training features", spec.input_width, train.width()));
    }
    if let Some(&bad) = train.labels().iter().find(|&&y| y >= spec.output_width) {
        return Err(Error::Training(format!("label {bad} out of range")));
    }
    let validation = validation.filter(|v| !v.is_empty());

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut params = MlpParams::init(spec, &mut rng);
    let n_params = params.param_count();
    let mut adam = Adam::new(n_params);
    let mut ws = Workspace::new(spec);
    let mut grad = MlpParams::zeros(spec);
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut best: Option<(f64, MlpParams, usize)> = None;
    let mut since_best = 0usize;
    let mut final_loss = f64::NAN;
    let mut epochs_run = 0;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.for_each_param_mut(|g| *g = 0.0);
            let mut batch_loss = 0.0;
            for &k in batch {
                batch_loss += accumulate_gradient(&params, train.x(k), train.y(k), &mut ws, &mut grad);
            }
            if !batch_loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch} (lr {})",
                    config.learning_rate
                )));
            }
            epoch_loss += batch_loss;
            let scale = 1.0 / batch.len() as f64;
            let mut flat = grad.flat_params();
            flat.iter_mut().for_each(|g| *g *= scale);
            match config.optimizer {
                Optimizer::Adam => adam.step(&mut params, &flat, config.learning_rate),
                Optimizer::Sgd => {
                    let mut k = 0;
                    params.for_each_param_mut(|p| {
                        *p -= config.learning_rate * flat[k];
                        k += 1;
                    });
                }
            }
        }
        final_loss = epoch_loss / train.len() as f64;
        epochs_run = epoch + 1;

        if let Some(val) = validation {
            let acc = evaluate_accuracy(&params, val)?;
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, params.clone(), epoch + 1));
                since_best = 0;
            } else {
                since_best += 1;
                if config.patience.is_some_and(|p| since_best >= p) {
                    break;
                }
            }
        }
    }

    let (params, validation_accuracy, best_epoch) = match best {
        Some((acc, p, e)) => (p, Some(acc), e),
        None => (params, None, epochs_run),
    };
    let train_accuracy = evaluate_accuracy(&params, train)?;
    Ok(TrainOutcome {
        params,
        train_accuracy,
        validation_accuracy,
        final_loss,
        epochs_run,
        best_epoch,
    })
}
