use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{check_len, StatisticalModel, Target};
use crate::error::{Error, Result};
use crate::params::Architecture;

/// y ~ N(θ, σ²·I_k), independent of x. Fisher information is I_k/σ² everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLocationModel {
    dim: usize,
    sigma: f64,
}

impl GaussianLocationModel {
    pub fn new(dim: usize, sigma: f64) -> Self {
        assert!(dim > 0 && sigma > 0.0, "Gaussian location model needs k > 0 and σ > 0");
        Self { dim, sigma }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl StatisticalModel for GaussianLocationModel {
    fn architecture(&self) -> Architecture {
        Architecture::GaussianLocation { dim: self.dim, sigma: self.sigma }
    }

    fn input_dim(&self) -> usize {
        0
    }

    fn num_classes(&self) -> Option<usize> {
        None
    }

    fn log_prob(&self, theta: &[f64], _x: &[f64], y: &Target) -> Result<f64> {
        check_len(self.dim, theta.len())?;
        let y = y.real()?;
        check_len(self.dim, y.len())?;
        let var = self.sigma * self.sigma;
        let sq: f64 = y.iter().zip(theta).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(-0.5 * self.dim as f64 * (2.0 * PI * var).ln() - sq / (2.0 * var))
    }

    fn grad_log_prob(&self, theta: &[f64], _x: &[f64], y: &Target) -> Result<Vec<f64>> {
        check_len(self.dim, theta.len())?;
        let y = y.real()?;
        check_len(self.dim, y.len())?;
        let var = self.sigma * self.sigma;
        Ok(y.iter().zip(theta).map(|(a, b)| (a - b) / var).collect())
    }

    fn predict_dist(&self, _theta: &[f64], _x: &[f64]) -> Result<Vec<f64>> {
        Err(Error::TargetMismatch("continuous model has no class distribution"))
    }

    fn sample_target(&self, theta: &[f64], _x: &[f64], rng: &mut dyn RngCore) -> Result<Target> {
        check_len(self.dim, theta.len())?;
        let y = theta
            .iter()
            .map(|m| {
                let z: f64 = rng.sample(StandardNormal);
                m + self.sigma * z
            })
            .collect();
        Ok(Target::Real(y))
    }

    fn analytic_fisher(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(self.dim, self.dim) / (self.sigma * self.sigma))
    }
}
