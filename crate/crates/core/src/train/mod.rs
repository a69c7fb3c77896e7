//! Mini-batch SGD on cross-entropy and the desk-scale experiment sweeps.

pub mod stats;
mod sweep;

pub use crate::data::{randomize_labels, LabeledDataset};
pub use sweep::{
    summarize, sweep_model_size, sweep_randomization, ExperimentKind, ExperimentRecord, GroupSummary, SweepConfig,
};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{MlpModel, StatisticalModel, Target};
use crate::params::ParamPoint;
use crate::rng;

/// Epoch cap for size sweeps.
pub const SIZE_SWEEP_EPOCHS: usize = 200;
/// Epoch cap for label-randomization sweeps.
pub const RANDOM_SWEEP_EPOCHS: usize = 600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub stop_at_zero_train_error: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: SIZE_SWEEP_EPOCHS, batch_size: 50, learning_rate: 0.05, seed: 0, stop_at_zero_train_error: true }
    }
}

impl TrainConfig {
    pub fn validate(&self, data_len: usize) -> Result<()> {
        if self.epochs == 0 || self.epochs > RANDOM_SWEEP_EPOCHS {
            return Err(Error::InvalidArgument(format!("epochs must be in 1..={RANDOM_SWEEP_EPOCHS}")));
        }
        if self.batch_size == 0 || self.batch_size > data_len {
            return Err(Error::InvalidArgument(format!(
                "batch size {} must be in 1..={data_len}",
                self.batch_size
            )));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean cross-entropy over the whole training set after the epoch.
    pub loss: f64,
    pub train_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainingLog {
    pub fn epochs_run(&self) -> usize {
        self.epochs.len()
    }

    pub fn last(&self) -> Option<&EpochStats> {
        self.epochs.last()
    }
}

/// Index of the largest probability; ties go to the smallest class index.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    best
}

/// Mean cross-entropy and misclassification rate over `data`.
pub fn evaluate<M: StatisticalModel + ?Sized>(model: &M, theta: &[f64], data: &LabeledDataset) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut loss = 0.0;
    let mut wrong = 0usize;
    for (x, &y) in data.inputs.iter().zip(&data.labels) {
        let probs = model.predict_dist(theta, x)?;
        loss -= model.log_prob(theta, x, &Target::Class(y))?;
        if argmax(&probs) != y {
            wrong += 1;
        }
    }
    let m = data.len() as f64;
    Ok((loss / m, wrong as f64 / m))
}

/// Fraction of test pairs whose predicted class differs from the label.
pub fn generalization_error<M: StatisticalModel + ?Sized>(model: &M, theta: &ParamPoint, test: &LabeledDataset) -> Result<f64> {
    Ok(evaluate(model, theta.values(), test)?.1)
}

/// Mini-batch SGD on mean cross-entropy, starting from `init`.
///
/// Each epoch visits the data in an order shuffled by the stream
/// `(seed, epoch)`; the last batch may be short.
pub fn sgd_train<M: StatisticalModel + ?Sized>(
    model: &M,
    init: ParamPoint,
    data: &LabeledDataset,
    config: &TrainConfig,
) -> Result<(ParamPoint, TrainingLog)> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    config.validate(data.len())?;
    if init.dim() != model.param_count() {
        return Err(Error::DimensionMismatch { expected: model.param_count(), got: init.dim() });
    }
    let mut theta = init;
    let mut log = TrainingLog::default();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = vec![0.0; theta.dim()];
    let shuffle_seed = rng::mix(config.seed, 0x5346_4744);
    for epoch in 0..config.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::stream(shuffle_seed, epoch as u64));
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                model.accumulate_grad_log_prob(
                    theta.values(),
                    &data.inputs[i],
                    &Target::Class(data.labels[i]),
                    scale,
                    &mut grad,
                )?;
            }
            // ascent on log-likelihood is descent on cross-entropy
            for (t, g) in theta.values_mut().iter_mut().zip(&grad) {
                *t += config.learning_rate * g;
            }
        }
        let (loss, train_error) = evaluate(model, theta.values(), data)?;
        if !loss.is_finite() || theta.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { epoch, loss });
        }
        log.epochs.push(EpochStats { epoch, loss, train_error });
        if config.stop_at_zero_train_error && train_error == 0.0 {
            break;
        }
    }
    Ok((theta, log))
}

/// [`sgd_train`] from the seeded default initialization of an MLP.
pub fn train_mlp(model: &MlpModel, data: &LabeledDataset, config: &TrainConfig) -> Result<(ParamPoint, TrainingLog)> {
    sgd_train(model, model.init_params(config.seed), data, config)
}
