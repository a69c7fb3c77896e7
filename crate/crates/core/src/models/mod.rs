//! Parameterized conditional models p(y|x;θ) with exact per-sample scores.

mod gaussian;
mod logistic;
mod mlp;

pub use gaussian::GaussianLocationModel;
pub use logistic::LogisticModel;
pub use mlp::{LayerTrace, MlpModel, DEFAULT_NEGATIVE_SLOPE};

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::params::Architecture;

/// An observed or sampled outcome y.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Class(usize),
    Real(Vec<f64>),
}

impl Target {
    pub fn class(&self) -> Result<usize> {
        match self {
            Target::Class(c) => Ok(*c),
            Target::Real(_) => Err(Error::TargetMismatch("expected a class label")),
        }
    }

    pub fn real(&self) -> Result<&[f64]> {
        match self {
            Target::Real(v) => Ok(v),
            Target::Class(_) => Err(Error::TargetMismatch("expected a real-valued target")),
        }
    }
}

/// Indexed (x, y) pairs that Fisher estimators can iterate over.
pub trait Observations: Sync {
    fn len(&self) -> usize;
    fn input(&self, index: usize) -> &[f64];
    fn target(&self, index: usize) -> Target;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Inputs paired with real-valued targets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegressionData {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Observations for RegressionData {
    fn len(&self) -> usize {
        self.inputs.len()
    }
    fn input(&self, index: usize) -> &[f64] {
        &self.inputs[index]
    }
    fn target(&self, index: usize) -> Target {
        Target::Real(self.targets[index].clone())
    }
}

impl Observations for [(Vec<f64>, Target)] {
    fn len(&self) -> usize {
        <[_]>::len(self)
    }
    fn input(&self, index: usize) -> &[f64] {
        &self[index].0
    }
    fn target(&self, index: usize) -> Target {
        self[index].1.clone()
    }
}

/// Behaviour shared by every model family.
///
/// Parameter vectors are passed flat; implementations check the length and
/// return [`Error::DimensionMismatch`] on disagreement.
pub trait StatisticalModel: Sync {
    fn architecture(&self) -> Architecture;

    fn param_count(&self) -> usize {
        self.architecture().param_count()
    }

    fn input_dim(&self) -> usize;

    /// Number of discrete outcomes, or `None` for continuous targets.
    fn num_classes(&self) -> Option<usize>;

    fn log_prob(&self, theta: &[f64], x: &[f64], y: &Target) -> Result<f64>;

    /// ∂/∂θ log p(y|x;θ) in canonical flat parameter order.
    fn grad_log_prob(&self, theta: &[f64], x: &[f64], y: &Target) -> Result<Vec<f64>>;

    /// Adds `scale · ∂/∂θ log p(y|x;θ)` into `out`; returns log p(y|x;θ).
    fn accumulate_grad_log_prob(&self, theta: &[f64], x: &[f64], y: &Target, scale: f64, out: &mut [f64]) -> Result<f64> {
        check_len(theta.len(), out.len())?;
        let g = self.grad_log_prob(theta, x, y)?;
        for (o, v) in out.iter_mut().zip(g) {
            *o += scale * v;
        }
        self.log_prob(theta, x, y)
    }

    /// Class probabilities p(·|x;θ). Errors for continuous models.
    fn predict_dist(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>>;

    /// Draw y ~ p(·|x;θ). The default inverts the CDF of `predict_dist`.
    fn sample_target(&self, theta: &[f64], x: &[f64], rng: &mut dyn RngCore) -> Result<Target> {
        let probs = self.predict_dist(theta, x)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (c, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(Target::Class(c));
            }
        }
        Ok(Target::Class(probs.len() - 1))
    }

    /// Closed-form Fisher information, when the family has one.
    fn analytic_fisher(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Central differences of `log_prob`, one coordinate at a time.
pub fn finite_diff_grad<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    x: &[f64],
    y: &Target,
    step: f64,
) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
    }
    check_len(model.param_count(), theta.len())?;
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let up = model.log_prob(&probe, x, y)?;
        probe[i] = orig - step;
        let down = model.log_prob(&probe, x, y)?;
        probe[i] = orig;
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Numerically stable log-softmax.
pub(crate) fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn models() -> Vec<Box<dyn StatisticalModel>> {
        vec![
            Box::new(MlpModel::new(vec![3, 5, 4, 3], DEFAULT_NEGATIVE_SLOPE).unwrap()),
            Box::new(LogisticModel::new(3)),
        ]
    }

    #[test]
    fn finite_diff_rejects_zero_step() {
        let m = GaussianLocationModel::new(1, 1.0);
        let err = finite_diff_grad(&m, &[0.3], &[], &Target::Real(vec![1.0]), 0.0);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn finite_diff_is_exact_for_gaussian_score() {
        let m = GaussianLocationModel::new(1, 1.0);
        let g = finite_diff_grad(&m, &[0.3], &[], &Target::Real(vec![1.0]), 1e-5).unwrap();
        assert!((g[0] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn sample_target_follows_predict_dist() {
        let m = LogisticModel::new(1);
        let theta = [1.0];
        let x = [0.7];
        let p1 = m.predict_dist(&theta, &x).unwrap()[1];
        let mut r = rng::stream(5, 0);
        let hits = (0..20_000)
            .filter(|_| m.sample_target(&theta, &x, &mut r).unwrap() == Target::Class(1))
            .count() as f64
            / 20_000.0;
        let sd = (p1 * (1.0 - p1) / 20_000.0).sqrt();
        assert!((hits - p1).abs() < 4.0 * sd);
    }

    proptest! {
        #[test]
        fn score_has_zero_mean_under_model(seed in 0u64..500) {
            use rand::Rng;
            let mut r = rng::stream(seed, 1);
            for m in models() {
                let theta: Vec<f64> = (0..m.param_count()).map(|_| r.random_range(-1.0..1.0)).collect();
                let x: Vec<f64> = (0..m.input_dim()).map(|_| r.random_range(-2.0..2.0)).collect();
                let probs = m.predict_dist(&theta, &x).unwrap();
                let sum: f64 = probs.iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-10);
                let mut mean = vec![0.0; theta.len()];
                for (c, p) in probs.iter().enumerate() {
                    let lp = m.log_prob(&theta, &x, &Target::Class(c)).unwrap();
                    prop_assert!((lp.exp() - p).abs() < 1e-10);
                    let g = m.grad_log_prob(&theta, &x, &Target::Class(c)).unwrap();
                    for (acc, gi) in mean.iter_mut().zip(g) {
                        *acc += p * gi;
                    }
                }
                prop_assert!(mean.iter().all(|v| v.abs() < 1e-8));
            }
        }
    }
}
