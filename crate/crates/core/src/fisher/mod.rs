//! Fisher information estimators, spectra and normalization.
//!
//! Three representations share one type: a dense d×d matrix, per-layer
//! Kronecker factor pairs, or a bare eigenvalue list. Everything downstream
//! of [`FisherOperator::spectrum`] only sees eigenvalues.

mod export;
mod kfac;
mod normalize;
mod spectrum;

pub use export::{format_float, read_dense_matrix, write_dense_matrix, write_spectrum_csv, DENSE_MAGIC};
pub use kfac::{kfac_factors, KroneckerBlock, LabelSource};
pub use normalize::{normalize, NormalizationConstant, Region};
pub use spectrum::{log_spd, sqrt_psd, symmetric_eigen, symmetric_eigenvalues, Spectrum};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{check_len, Observations, StatisticalModel, Target};
use crate::params::ParamPoint;
use crate::rng;

/// Largest parameter count for which dense Fisher matrices are formed.
pub const DENSE_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorTag {
    /// Scores at the observed labels.
    Empirical,
    /// Scores at labels drawn from the model.
    ModelSampled,
    /// Scores summed over every class, weighted by the model's probabilities.
    Exhaustive,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FisherRepr {
    Dense(DMatrix<f64>),
    Kronecker(Vec<KroneckerBlock>),
    Spectrum(Spectrum),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherOperator {
    repr: FisherRepr,
    dim: usize,
    estimator: EstimatorTag,
}

impl FisherOperator {
    pub fn dense(matrix: DMatrix<f64>, estimator: EstimatorTag) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("Fisher matrix must be square and nonempty".into()));
        }
        let dim = matrix.nrows();
        Ok(Self { repr: FisherRepr::Dense(matrix), dim, estimator })
    }

    pub fn kronecker(blocks: Vec<KroneckerBlock>, estimator: EstimatorTag) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Empty("Kronecker blocks"));
        }
        let dim = blocks.iter().map(KroneckerBlock::dim).sum();
        Ok(Self { repr: FisherRepr::Kronecker(blocks), dim, estimator })
    }

    pub fn from_spectrum(spectrum: Spectrum, estimator: EstimatorTag) -> Self {
        Self { dim: spectrum.len(), repr: FisherRepr::Spectrum(spectrum), estimator }
    }

    pub fn repr(&self) -> &FisherRepr {
        &self.repr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn estimator(&self) -> EstimatorTag {
        self.estimator
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            FisherRepr::Dense(m) => m.trace(),
            FisherRepr::Kronecker(blocks) => blocks.iter().map(|b| b.activations.trace() * b.gradients.trace()).sum(),
            FisherRepr::Spectrum(s) => s.trace(),
        }
    }

    /// The same operator multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let repr = match &self.repr {
            FisherRepr::Dense(m) => FisherRepr::Dense(m * factor),
            FisherRepr::Kronecker(blocks) => FisherRepr::Kronecker(
                blocks
                    .iter()
                    .map(|b| KroneckerBlock { activations: b.activations.clone(), gradients: &b.gradients * factor })
                    .collect(),
            ),
            FisherRepr::Spectrum(s) => FisherRepr::Spectrum(s.scaled(factor)),
        };
        Self { repr, dim: self.dim, estimator: self.estimator }
    }

    /// Dense matrix in canonical parameter order. Unavailable for bare spectra.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        match &self.repr {
            FisherRepr::Dense(m) => Ok(m.clone()),
            FisherRepr::Kronecker(blocks) => {
                let mut out = DMatrix::zeros(self.dim, self.dim);
                let mut offset = 0;
                for b in blocks {
                    b.write_dense(&mut out, offset);
                    offset += b.dim();
                }
                Ok(out)
            }
            FisherRepr::Spectrum(_) => Err(Error::InvalidArgument("a bare spectrum has no dense form".into())),
        }
    }

    /// Eigenvalues, clamped at zero and sorted nonincreasing.
    ///
    /// Kronecker blocks contribute every product λᵢ(A)·λⱼ(G).
    pub fn spectrum(&self) -> Result<Spectrum> {
        match &self.repr {
            FisherRepr::Dense(m) => Ok(Spectrum::from_raw(symmetric_eigenvalues(m)?)),
            FisherRepr::Kronecker(blocks) => {
                let parts: Vec<(Vec<f64>, f64)> = blocks
                    .par_iter()
                    .map(|b| b.eigenvalue_products())
                    .collect::<Result<_>>()?;
                let clamped = parts.iter().map(|p| p.1).fold(0.0, f64::max);
                let values: Vec<f64> = parts.into_iter().flat_map(|p| p.0).collect();
                let mut s = Spectrum::from_raw(values);
                s.record_clamp(clamped);
                Ok(s)
            }
            FisherRepr::Spectrum(s) => Ok(s.clone()),
        }
    }

    /// Converts to the spectrum representation.
    pub fn into_spectrum(self) -> Result<Self> {
        let estimator = self.estimator;
        Ok(Self::from_spectrum(self.spectrum()?, estimator))
    }
}

/// Which dense estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DenseEstimator {
    Empirical,
    Sampled { labels_per_input: usize, seed: u64 },
    Exhaustive,
    Analytic,
}

/// Stacks weighted score rows and returns Σ wᵢ gᵢ gᵢᵀ.
fn outer_product_sum(rows: Vec<(f64, Vec<f64>)>, dim: usize) -> DMatrix<f64> {
    let count = rows.len();
    let mut stacked = DMatrix::zeros(count, dim);
    for (r, (w, g)) in rows.into_iter().enumerate() {
        let s = w.sqrt();
        for (c, v) in g.into_iter().enumerate() {
            stacked[(r, c)] = s * v;
        }
    }
    stacked.tr_mul(&stacked)
}

fn check_theta<M: StatisticalModel + ?Sized>(model: &M, theta: &ParamPoint) -> Result<()> {
    check_len(model.param_count(), theta.dim())
}

/// (1/m)·Σ gᵢgᵢᵀ over the observed pairs.
pub fn empirical_fisher<M, O>(model: &M, theta: &ParamPoint, data: &O) -> Result<FisherOperator>
where
    M: StatisticalModel + ?Sized,
    O: Observations + ?Sized,
{
    check_theta(model, theta)?;
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let m = data.len();
    let weight = 1.0 / m as f64;
    let rows = (0..m)
        .into_par_iter()
        .map(|i| Ok((weight, model.grad_log_prob(theta.values(), data.input(i), &data.target(i))?)))
        .collect::<Result<Vec<_>>>()?;
    FisherOperator::dense(outer_product_sum(rows, theta.dim()), EstimatorTag::Empirical)
}

/// Scores at labels drawn from p(·|x;θ), `labels_per_input` draws per input.
///
/// Draw `j` for input `i` uses the stream keyed by `(seed, i, j)`.
pub fn sampled_fisher<M>(
    model: &M,
    theta: &ParamPoint,
    inputs: &[Vec<f64>],
    labels_per_input: usize,
    seed: u64,
) -> Result<FisherOperator>
where
    M: StatisticalModel + ?Sized,
{
    check_theta(model, theta)?;
    if inputs.is_empty() {
        return Err(Error::Empty("inputs"));
    }
    if labels_per_input == 0 {
        return Err(Error::InvalidArgument("labels_per_input must be positive".into()));
    }
    let weight = 1.0 / (inputs.len() * labels_per_input) as f64;
    let rows = inputs
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut r = rng::stream(seed, i as u64);
            (0..labels_per_input)
                .map(|_| {
                    let y = model.sample_target(theta.values(), x, &mut r)?;
                    Ok((weight, model.grad_log_prob(theta.values(), x, &y)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    FisherOperator::dense(outer_product_sum(rows, theta.dim()), EstimatorTag::ModelSampled)
}

/// (1/m)·Σₓ Σ_y p(y|x;θ) g gᵀ: the infinite-draw limit of [`sampled_fisher`].
pub fn exhaustive_fisher<M>(model: &M, theta: &ParamPoint, inputs: &[Vec<f64>]) -> Result<FisherOperator>
where
    M: StatisticalModel + ?Sized,
{
    check_theta(model, theta)?;
    if inputs.is_empty() {
        return Err(Error::Empty("inputs"));
    }
    let weight = 1.0 / inputs.len() as f64;
    let rows = inputs
        .par_iter()
        .map(|x| {
            let probs = model.predict_dist(theta.values(), x)?;
            probs
                .iter()
                .enumerate()
                .map(|(c, p)| Ok((weight * p, model.grad_log_prob(theta.values(), x, &Target::Class(c))?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    FisherOperator::dense(outer_product_sum(rows, theta.dim()), EstimatorTag::Exhaustive)
}

pub fn analytic_fisher<M>(model: &M, theta: &ParamPoint) -> Result<FisherOperator>
where
    M: StatisticalModel + ?Sized,
{
    check_theta(model, theta)?;
    let m = model
        .analytic_fisher(theta.values())
        .ok_or_else(|| Error::InvalidArgument("model has no closed-form Fisher information".into()))?;
    FisherOperator::dense(m, EstimatorTag::Analytic)
}

/// Runs the selected dense estimator on `data`.
pub fn dense_fisher<M>(model: &M, theta: &ParamPoint, data: &dyn Observations, estimator: DenseEstimator) -> Result<FisherOperator>
where
    M: StatisticalModel + ?Sized,
{
    let inputs = || (0..data.len()).map(|i| data.input(i).to_vec()).collect::<Vec<_>>();
    match estimator {
        DenseEstimator::Empirical => empirical_fisher(model, theta, data),
        DenseEstimator::Sampled { labels_per_input, seed } => sampled_fisher(model, theta, &inputs(), labels_per_input, seed),
        DenseEstimator::Exhaustive => exhaustive_fisher(model, theta, &inputs()),
        DenseEstimator::Analytic => analytic_fisher(model, theta),
    }
}
