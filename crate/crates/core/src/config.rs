//! Effective-dimension configuration and the resolution constant κ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample count with 2π·log n < n.
pub const MIN_SAMPLES: u64 = 19;

/// Default number of ball samples for Monte-Carlo integration.
pub const DEFAULT_THETA_SAMPLES: usize = 100;

/// Lower end of the open interval of admissible γ for a given n.
pub fn gamma_lower_bound(n: u64) -> f64 {
    2.0 * PI * (n as f64).ln() / n as f64
}

/// κ = γ·n / (2π·log n).
pub fn kappa(n: u64, gamma: f64) -> Result<f64> {
    if n < MIN_SAMPLES {
        return Err(Error::SampleCountTooSmall { n });
    }
    let lower = gamma_lower_bound(n);
    if !(gamma > lower && gamma <= 1.0) {
        return Err(Error::GammaOutOfRange { gamma, lower });
    }
    Ok(gamma * n as f64 / (2.0 * PI * (n as f64).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationMode {
    /// Evaluate the ball integral at the centre only.
    Midpoint,
    /// Uniform Monte-Carlo samples over the ball.
    MonteCarlo,
}

impl IntegrationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntegrationMode::Midpoint => "midpoint",
            IntegrationMode::MonteCarlo => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdConfig {
    pub n: u64,
    pub gamma: f64,
    pub epsilon: f64,
    pub mode: IntegrationMode,
    pub theta_samples: usize,
    pub seed: u64,
}

/// Non-fatal observations about a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConfigWarning {
    /// ε sits exactly on 1/√n; the local definition asks for a strict inequality.
    EpsilonAtBoundary { epsilon: f64 },
}

impl EdConfig {
    /// Validated configuration with ε = 1/√n, midpoint mode, 100 samples.
    pub fn new(n: u64, gamma: f64) -> Result<Self> {
        let cfg = Self {
            n,
            gamma,
            epsilon: 1.0 / (n as f64).sqrt(),
            mode: IntegrationMode::Midpoint,
            theta_samples: DEFAULT_THETA_SAMPLES,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: IntegrationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_theta_samples(mut self, samples: usize) -> Self {
        self.theta_samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn min_epsilon(&self) -> f64 {
        1.0 / (self.n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        kappa(self.n, self.gamma)?;
        let min = self.min_epsilon();
        // relative slack so that 1/√n typed in by hand still counts as the boundary
        if !(self.epsilon.is_finite() && self.epsilon >= min * (1.0 - 1e-12)) {
            return Err(Error::EpsilonTooSmall { epsilon: self.epsilon, min });
        }
        if self.theta_samples == 0 {
            return Err(Error::InvalidArgument("theta_samples must be positive".into()));
        }
        Ok(())
    }

    pub fn kappa(&self) -> Result<f64> {
        kappa(self.n, self.gamma)
    }

    pub fn warnings(&self) -> Vec<ConfigWarning> {
        let min = self.min_epsilon();
        if ((self.epsilon - min) / min).abs() <= 1e-12 {
            vec![ConfigWarning::EpsilonAtBoundary { epsilon: self.epsilon }]
        } else {
            Vec::new()
        }
    }
}
