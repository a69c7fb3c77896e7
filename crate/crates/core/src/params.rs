use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Describes how a flat parameter vector is laid out for a model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    /// Fully connected network, leaky-ReLU hidden units, softmax head.
    Mlp { widths: Vec<usize>, negative_slope: f64 },
    GaussianLocation { dim: usize, sigma: f64 },
    Logistic { dim: usize },
}

impl Architecture {
    pub fn param_count(&self) -> usize {
        match self {
            Architecture::Mlp { widths, .. } => widths
                .windows(2)
                .map(|w| w[0] * w[1] + w[1])
                .sum(),
            Architecture::GaussianLocation { dim, .. } | Architecture::Logistic { dim } => *dim,
        }
    }
}

/// A point θ in parameter space together with the layout it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    values: Vec<f64>,
    arch: Architecture,
}

impl ParamPoint {
    pub fn new(values: Vec<f64>, arch: Architecture) -> Result<Self> {
        let expected = arch.param_count();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        Ok(Self { values, arch })
    }

    pub fn zeros(arch: Architecture) -> Self {
        let values = vec![0.0; arch.param_count()];
        Self { values, arch }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Same architecture, new coordinates. Length is checked.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.arch.clone())
    }

    pub fn distance(&self, other: &ParamPoint) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}
