use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectrum::symmetric_eigenvalues;
use super::{EstimatorTag, FisherOperator};
use crate::error::{Error, Result};
use crate::models::{MlpModel, Observations, StatisticalModel};
use crate::params::{Architecture, ParamPoint};
use crate::rng;

/// One layer's factor pair. The block is `A ⊗ G`, where `A` is the second
/// moment of the bias-augmented layer input and `G` the second moment of the
/// pre-activation score.
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerBlock {
    pub activations: DMatrix<f64>,
    pub gradients: DMatrix<f64>,
}

impl KroneckerBlock {
    pub fn new(activations: DMatrix<f64>, gradients: DMatrix<f64>) -> Result<Self> {
        if !activations.is_square() || !gradients.is_square() || activations.nrows() < 2 || gradients.nrows() == 0 {
            return Err(Error::InvalidArgument("Kronecker factors must be square (A at least 2x2)".into()));
        }
        Ok(Self { activations, gradients })
    }

    pub fn dim(&self) -> usize {
        self.activations.nrows() * self.gradients.nrows()
    }

    /// All products λᵢ(A)·λⱼ(G) with factor eigenvalues clamped at zero,
    /// plus the largest clamp applied.
    pub(crate) fn eigenvalue_products(&self) -> Result<(Vec<f64>, f64)> {
        let mut clamped: f64 = 0.0;
        let mut clamp = |v: f64| {
            if v < 0.0 {
                clamped = clamped.max(-v);
                0.0
            } else {
                v
            }
        };
        let a: Vec<f64> = symmetric_eigenvalues(&self.activations)?.into_iter().map(&mut clamp).collect();
        let g: Vec<f64> = symmetric_eigenvalues(&self.gradients)?.into_iter().map(&mut clamp).collect();
        let products = a.iter().flat_map(|x| g.iter().map(move |y| x * y)).collect();
        Ok((products, clamped))
    }

    /// Writes `A ⊗ G` into `out` at `offset`, permuted to the flat parameter
    /// order (weights row-major, then biases).
    pub(crate) fn write_dense(&self, out: &mut DMatrix<f64>, offset: usize) {
        let fan_in = self.activations.nrows() - 1;
        let fan_out = self.gradients.nrows();
        let index = |i: usize, j: usize| {
            if j < fan_in {
                offset + i * fan_in + j
            } else {
                offset + fan_out * fan_in + i
            }
        };
        for i in 0..fan_out {
            for j in 0..=fan_in {
                for k in 0..fan_out {
                    for l in 0..=fan_in {
                        out[(index(i, j), index(k, l))] = self.activations[(j, l)] * self.gradients[(i, k)];
                    }
                }
            }
        }
    }
}

/// Labels used for the output-gradient factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LabelSource {
    Empirical,
    /// One label per input drawn from the model, stream `(seed, i)`.
    Sampled { seed: u64 },
    Exhaustive,
}

impl LabelSource {
    fn tag(&self) -> EstimatorTag {
        match self {
            LabelSource::Empirical => EstimatorTag::Empirical,
            LabelSource::Sampled { .. } => EstimatorTag::ModelSampled,
            LabelSource::Exhaustive => EstimatorTag::Exhaustive,
        }
    }
}

struct SampleFactors {
    activations: Vec<Vec<f64>>,
    weighted_deltas: Vec<(f64, Vec<Vec<f64>>)>,
}

/// Σ wᵢ vᵢvᵢᵀ via one stacked product.
fn second_moment<'a>(rows: impl Iterator<Item = (f64, &'a [f64])>, count: usize, dim: usize) -> DMatrix<f64> {
    let mut stacked = DMatrix::zeros(count, dim);
    for (r, (w, v)) in rows.enumerate() {
        let s = w.sqrt();
        for (c, x) in v.iter().enumerate() {
            stacked[(r, c)] = s * x;
        }
    }
    stacked.tr_mul(&stacked)
}

/// Per-layer K-FAC factors averaged over `data`. The result is block diagonal
/// across layers.
pub fn kfac_factors<O>(model: &MlpModel, theta: &ParamPoint, data: &O, labels: LabelSource) -> Result<FisherOperator>
where
    O: Observations + ?Sized,
{
    if !matches!(theta.arch(), Architecture::Mlp { .. }) {
        return Err(Error::NotMlp);
    }
    if theta.dim() != model.param_count() {
        return Err(Error::DimensionMismatch { expected: model.param_count(), got: theta.dim() });
    }
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let m = data.len();
    let w = theta.values();
    let samples = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = data.input(i);
            let trace = model.forward(w, x)?;
            let label_weights: Vec<(usize, f64)> = match labels {
                LabelSource::Empirical => vec![(data.target(i).class()?, 1.0)],
                LabelSource::Sampled { seed } => {
                    let mut r = rng::stream(seed, i as u64);
                    vec![(model.sample_target(w, x, &mut r)?.class()?, 1.0)]
                }
                LabelSource::Exhaustive => model.predict_dist(w, x)?.into_iter().enumerate().collect(),
            };
            let weighted_deltas = label_weights
                .into_iter()
                .map(|(label, p)| Ok((p, model.backward(w, &trace, model.logit_score(&trace, label)?))))
                .collect::<Result<Vec<_>>>()?;
            let activations = trace
                .inputs
                .into_iter()
                .map(|mut a| {
                    a.push(1.0);
                    a
                })
                .collect();
            Ok(SampleFactors { activations, weighted_deltas })
        })
        .collect::<Result<Vec<_>>>()?;

    let inv_m = 1.0 / m as f64;
    let blocks = (0..model.num_layers())
        .into_par_iter()
        .map(|l| {
            let (fan_in, fan_out, _) = model.layer_shape(l);
            let a = second_moment(samples.iter().map(|s| (inv_m, s.activations[l].as_slice())), m, fan_in + 1);
            let rows: usize = samples.iter().map(|s| s.weighted_deltas.len()).sum();
            let g = second_moment(
                samples
                    .iter()
                    .flat_map(|s| s.weighted_deltas.iter().map(move |(p, d)| (p * inv_m, d[l].as_slice()))),
                rows,
                fan_out,
            );
            KroneckerBlock::new(a, g)
        })
        .collect::<Result<Vec<_>>>()?;
    FisherOperator::kronecker(blocks, labels.tag())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::empirical_fisher;
    use crate::models::Target;

    #[test]
    fn product_rule_on_diagonal_factors() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, 7.0]));
        let op = FisherOperator::kronecker(vec![KroneckerBlock::new(a, g).unwrap()], EstimatorTag::Analytic).unwrap();
        let s = op.spectrum().unwrap();
        let expected = [21.0, 15.0, 14.0, 10.0];
        for (x, y) in s.values().iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn block_dims_sum_to_parameter_count() {
        let model = MlpModel::two_hidden(3, 6, 4, 3).unwrap();
        let theta = model.init_params(1);
        let data: Vec<(Vec<f64>, Target)> = (0..20).map(|i| (vec![i as f64 * 0.1, 0.5, -0.2], Target::Class(i % 3))).collect();
        let op = kfac_factors(&model, &theta, data.as_slice(), LabelSource::Sampled { seed: 4 }).unwrap();
        assert_eq!(op.dim(), model.param_count());
        assert_eq!(op.spectrum().unwrap().len(), model.param_count());
        if let super::super::FisherRepr::Kronecker(blocks) = op.repr() {
            for b in blocks {
                assert!((&b.activations - b.activations.transpose()).abs().max() < 1e-10);
                assert!((&b.gradients - b.gradients.transpose()).abs().max() < 1e-10);
                assert!(symmetric_eigenvalues(&b.activations).unwrap().iter().all(|v| *v > -1e-10));
                assert!(symmetric_eigenvalues(&b.gradients).unwrap().iter().all(|v| *v > -1e-10));
            }
        } else {
            panic!("expected Kronecker representation");
        }
    }

    #[test]
    fn single_layer_single_sample_is_exact() {
        let model = MlpModel::new(vec![4, 3], 0.01).unwrap();
        let theta = model.init_params(6);
        let data = vec![(vec![0.3, -1.2, 0.8, 0.05], Target::Class(2))];
        let kfac = kfac_factors(&model, &theta, data.as_slice(), LabelSource::Empirical).unwrap();
        let dense = empirical_fisher(&model, &theta, data.as_slice()).unwrap();
        let diff = (kfac.to_dense().unwrap() - dense.to_dense().unwrap()).abs().max();
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn non_mlp_point_is_rejected() {
        let model = MlpModel::new(vec![1, 2], 0.01).unwrap();
        let theta = ParamPoint::new(vec![0.0; 4], Architecture::Logistic { dim: 4 }).unwrap();
        let data = vec![(vec![1.0], Target::Class(0))];
        assert_eq!(kfac_factors(&model, &theta, data.as_slice(), LabelSource::Empirical), Err(Error::NotMlp));
    }
}
