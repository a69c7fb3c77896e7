use nalgebra::DMatrix;

use super::{check_len, StatisticalModel, Target};
use crate::error::{Error, Result};
use crate::params::Architecture;

/// Two-class logistic regression without intercept: p(y=1|x) = σ(θᵀx).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogisticModel {
    dim: usize,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log σ(t), stable for large |t|.
fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

impl LogisticModel {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "logistic model needs at least one input");
        Self { dim }
    }

    fn margin(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        check_len(self.dim, theta.len())?;
        check_len(self.dim, x.len())?;
        Ok(theta.iter().zip(x).map(|(a, b)| a * b).sum())
    }

    /// Exact Fisher E_x[σ(1−σ) x xᵀ] over a finite, equally weighted input set.
    pub fn fisher_over_inputs(&self, theta: &[f64], inputs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let mut f = DMatrix::zeros(self.dim, self.dim);
        for x in inputs {
            let s = sigmoid(self.margin(theta, x)?);
            let xv = nalgebra::DVector::from_column_slice(x);
            f += &xv * xv.transpose() * (s * (1.0 - s));
        }
        Ok(f / inputs.len() as f64)
    }
}

impl StatisticalModel for LogisticModel {
    fn architecture(&self) -> Architecture {
        Architecture::Logistic { dim: self.dim }
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> Option<usize> {
        Some(2)
    }

    fn log_prob(&self, theta: &[f64], x: &[f64], y: &Target) -> Result<f64> {
        let t = self.margin(theta, x)?;
        match y.class()? {
            0 => Ok(log_sigmoid(-t)),
            1 => Ok(log_sigmoid(t)),
            label => Err(Error::LabelOutOfRange { label, classes: 2 }),
        }
    }

    fn grad_log_prob(&self, theta: &[f64], x: &[f64], y: &Target) -> Result<Vec<f64>> {
        let t = self.margin(theta, x)?;
        let label = y.class()?;
        if label > 1 {
            return Err(Error::LabelOutOfRange { label, classes: 2 });
        }
        let coef = label as f64 - sigmoid(t);
        Ok(x.iter().map(|v| coef * v).collect())
    }

    fn predict_dist(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let p = sigmoid(self.margin(theta, x)?);
        Ok(vec![1.0 - p, p])
    }
}
