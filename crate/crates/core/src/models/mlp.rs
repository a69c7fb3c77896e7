use rand::Rng;

use super::{check_len, log_softmax, StatisticalModel, Target};
use crate::error::{Error, Result};
use crate::params::{Architecture, ParamPoint};
use crate::rng;

pub const DEFAULT_NEGATIVE_SLOPE: f64 = 0.01;

/// Fully connected leaky-ReLU network with a softmax head.
///
/// Parameters are stored layer by layer; within a layer the weight matrix
/// (shape `out × in`) comes first in row-major order, then the biases.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    widths: Vec<usize>,
    negative_slope: f64,
    offsets: Vec<usize>,
}

/// Per-layer quantities from one forward/backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    /// Input activations to each layer (`inputs[0]` is x).
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activations of each layer; the last entry holds the logits.
    pub preacts: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn new(widths: Vec<usize>, negative_slope: f64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid layer widths {widths:?}")));
        }
        if *widths.last().unwrap() < 2 {
            return Err(Error::InvalidArgument("softmax head needs at least two classes".into()));
        }
        if !negative_slope.is_finite() {
            return Err(Error::InvalidArgument("negative slope must be finite".into()));
        }
        let mut offsets = Vec::with_capacity(widths.len());
        let mut acc = 0;
        for w in widths.windows(2) {
            offsets.push(acc);
            acc += w[0] * w[1] + w[1];
        }
        offsets.push(acc);
        Ok(Self { widths, negative_slope, offsets })
    }

    /// The two-hidden-layer family used in the experiments.
    pub fn two_hidden(input: usize, h1: usize, h2: usize, classes: usize) -> Result<Self> {
        Self::new(vec![input, h1, h2, classes], DEFAULT_NEGATIVE_SLOPE)
    }

    pub fn from_architecture(arch: &Architecture) -> Result<Self> {
        match arch {
            Architecture::Mlp { widths, negative_slope } => Self::new(widths.clone(), *negative_slope),
            _ => Err(Error::NotMlp),
        }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn negative_slope(&self) -> f64 {
        self.negative_slope
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    /// (fan_in, fan_out, offset of the first weight) for layer `l`.
    pub fn layer_shape(&self, l: usize) -> (usize, usize, usize) {
        (self.widths[l], self.widths[l + 1], self.offsets[l])
    }

    /// Uniform(−1/√fan_in, 1/√fan_in) for every weight and bias.
    pub fn init_params(&self, seed: u64) -> ParamPoint {
        let mut values = Vec::with_capacity(self.param_count());
        for l in 0..self.num_layers() {
            let (fan_in, fan_out, _) = self.layer_shape(l);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut r = rng::stream(seed, l as u64);
            for _ in 0..fan_in * fan_out + fan_out {
                values.push(r.random_range(-bound..=bound));
            }
        }
        ParamPoint::new(values, self.architecture()).expect("init matches layout")
    }

    fn activate(&self, z: f64) -> f64 {
        if z > 0.0 {
            z
        } else {
            self.negative_slope * z
        }
    }

    // subgradient at exactly 0 takes the negative branch
    fn activate_grad(&self, z: f64) -> f64 {
        if z > 0.0 {
            1.0
        } else {
            self.negative_slope
        }
    }

    pub fn forward(&self, theta: &[f64], x: &[f64]) -> Result<LayerTrace> {
        check_len(self.param_count(), theta.len())?;
        check_len(self.widths[0], x.len())?;
        let layers = self.num_layers();
        let mut inputs = Vec::with_capacity(layers);
        let mut preacts = Vec::with_capacity(layers);
        let mut a = x.to_vec();
        for l in 0..layers {
            let (fan_in, fan_out, off) = self.layer_shape(l);
            let weights = &theta[off..off + fan_in * fan_out];
            let biases = &theta[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
            let z: Vec<f64> = weights
                .chunks_exact(fan_in)
                .zip(biases)
                .map(|(row, b)| b + row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>())
                .collect();
            let next = if l + 1 < layers { z.iter().map(|v| self.activate(*v)).collect() } else { Vec::new() };
            inputs.push(std::mem::replace(&mut a, next));
            preacts.push(z);
        }
        Ok(LayerTrace { inputs, preacts })
    }

    /// Back-propagates `output_grad` (∂/∂logits) to the pre-activation gradient of every layer.
    pub fn backward(&self, theta: &[f64], trace: &LayerTrace, output_grad: Vec<f64>) -> Vec<Vec<f64>> {
        let layers = self.num_layers();
        let mut deltas = vec![Vec::new(); layers];
        let mut delta = output_grad;
        for l in (0..layers).rev() {
            if l > 0 {
                let (fan_in, fan_out, off) = self.layer_shape(l);
                let weights = &theta[off..off + fan_in * fan_out];
                let mut prev = vec![0.0; fan_in];
                for (row, d) in weights.chunks_exact(fan_in).zip(&delta) {
                    for (p, w) in prev.iter_mut().zip(row) {
                        *p += w * d;
                    }
                }
                for (p, z) in prev.iter_mut().zip(&trace.preacts[l - 1]) {
                    *p *= self.activate_grad(*z);
                }
                deltas[l] = std::mem::replace(&mut delta, prev);
            } else {
                deltas[0] = std::mem::take(&mut delta);
            }
        }
        deltas
    }

    /// ∂ log p(y|x) / ∂ logits = onehot(y) − softmax.
    pub fn logit_score(&self, trace: &LayerTrace, label: usize) -> Result<Vec<f64>> {
        let classes = *self.widths.last().unwrap();
        if label >= classes {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        let logp = log_softmax(trace.preacts.last().unwrap());
        Ok(logp
            .iter()
            .enumerate()
            .map(|(c, lp)| if c == label { 1.0 } else { 0.0 } - lp.exp())
            .collect())
    }

    /// Adds `scale · ∂ log p(y|x)/∂θ` into `out` and returns log p(y|x).
    pub fn accumulate_grad(&self, theta: &[f64], x: &[f64], label: usize, scale: f64, out: &mut [f64]) -> Result<f64> {
        check_len(self.param_count(), out.len())?;
        let trace = self.forward(theta, x)?;
        let score = self.logit_score(&trace, label)?;
        let logp = log_softmax(trace.preacts.last().unwrap())[label];
        let deltas = self.backward(theta, &trace, score);
        self.scatter_grad(&trace, &deltas, scale, out);
        Ok(logp)
    }

    fn scatter_grad(&self, trace: &LayerTrace, deltas: &[Vec<f64>], scale: f64, out: &mut [f64]) {
        for l in 0..self.num_layers() {
            let (fan_in, fan_out, off) = self.layer_shape(l);
            let a = &trace.inputs[l];
            let (w_out, b_out) = out[off..off + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            for ((row, d), b) in w_out.chunks_exact_mut(fan_in).zip(&deltas[l]).zip(b_out) {
                let sd = scale * d;
                for (g, v) in row.iter_mut().zip(a) {
                    *g += sd * v;
                }
                *b += sd;
            }
        }
    }
}

impl StatisticalModel for MlpModel {
    fn architecture(&self) -> Architecture {
        Architecture::Mlp { widths: self.widths.clone(), negative_slope: self.negative_slope }
    }

    fn param_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn input_dim(&self) -> usize {
        self.widths[0]
    }

    fn num_classes(&self) -> Option<usize> {
        self.widths.last().copied()
    }

    fn log_prob(&self, theta: &[f64], x: &[f64], y: &Target) -> Result<f64> {
        let label = y.class()?;
        let classes = *self.widths.last().unwrap();
        if label >= classes {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        let trace = self.forward(theta, x)?;
        Ok(log_softmax(trace.preacts.last().unwrap())[label])
    }

    fn grad_log_prob(&self, theta: &[f64], x: &[f64], y: &Target) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.param_count()];
        self.accumulate_grad(theta, x, y.class()?, 1.0, &mut g)?;
        Ok(g)
    }

    fn accumulate_grad_log_prob(&self, theta: &[f64], x: &[f64], y: &Target, scale: f64, out: &mut [f64]) -> Result<f64> {
        self.accumulate_grad(theta, x, y.class()?, scale, out)
    }

    fn predict_dist(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let trace = self.forward(theta, x)?;
        Ok(log_softmax(trace.preacts.last().unwrap()).into_iter().map(f64::exp).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::finite_diff_grad;

    #[test]
    fn zero_network_is_uniform() {
        let m = MlpModel::two_hidden(4, 6, 5, 3).unwrap();
        let theta = vec![0.0; m.param_count()];
        for y in 0..3 {
            let lp = m.log_prob(&theta, &[0.3, -1.0, 2.0, 5.0], &Target::Class(y)).unwrap();
            assert!((lp - (1.0f64 / 3.0).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn output_bias_shift_leaves_distribution_unchanged() {
        let m = MlpModel::two_hidden(3, 4, 4, 5).unwrap();
        let theta = m.init_params(9).into_values();
        let x = [0.2, -0.4, 1.3];
        let before = m.predict_dist(&theta, &x).unwrap();
        let mut shifted = theta.clone();
        let n = shifted.len();
        for b in &mut shifted[n - 5..] {
            *b += 3.7;
        }
        let after = m.predict_dist(&shifted, &x).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = MlpModel::two_hidden(3, 7, 5, 4).unwrap();
        let theta = m.init_params(2).into_values();
        let x = [0.5, -1.5, 0.25];
        let y = Target::Class(2);
        let exact = m.grad_log_prob(&theta, &x, &y).unwrap();
        let fd = finite_diff_grad(&m, &theta, &x, &y, 1e-5).unwrap();
        for (a, b) in exact.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-5 * a.abs().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn dimension_and_label_errors() {
        let m = MlpModel::two_hidden(2, 3, 3, 2).unwrap();
        let theta = vec![0.0; m.param_count()];
        assert!(matches!(m.log_prob(&theta[1..], &[0.0, 0.0], &Target::Class(0)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.log_prob(&theta, &[0.0], &Target::Class(0)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.log_prob(&theta, &[0.0, 0.0], &Target::Class(2)), Err(Error::LabelOutOfRange { .. })));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let m = MlpModel::two_hidden(4, 8, 8, 2).unwrap();
        let a = m.init_params(1);
        assert_eq!(a, m.init_params(1));
        assert_ne!(a, m.init_params(2));
        let (_, _, off) = m.layer_shape(1);
        assert!(a.values()[off..].iter().all(|v| v.abs() <= 1.0 / 8f64.sqrt()));
    }

    #[test]
    fn leaky_subgradient_at_zero_uses_negative_branch() {
        let m = MlpModel::new(vec![1, 1, 2], 0.25).unwrap();
        // hidden pre-activation is exactly zero: w = 0, b = 0
        let theta = vec![0.0, 0.0, 1.0, -1.0, 0.0, 0.0];
        let trace = m.forward(&theta, &[3.0]).unwrap();
        let deltas = m.backward(&theta, &trace, vec![1.0, 0.0]);
        assert_eq!(deltas[0], vec![0.25]);
    }
}
