//! Generalization-bound expressions evaluated in log space.

mod continuity;

pub use continuity::{
    continuity_bound, continuity_phi, continuity_psi, estimate_lambda, log_mean_exp, sqrt_diff_max, ContinuityBound,
    LambdaEstimate, Psi,
};

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::config::kappa;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Lipschitz,
    LogLipschitz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: u64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Parameter count.
    pub d: usize,
    /// Local effective dimension.
    pub d_eff: f64,
    /// Lipschitz product M = M₁M₂.
    pub lipschitz: f64,
    /// Loss range B.
    pub loss_range: f64,
    /// Bound Λ on ‖∇θ log F̄‖.
    pub lambda: f64,
    /// Dimensional constant c_d.
    pub c_d: f64,
    /// Log-Lipschitz constant M₂ of the loss (log-Lipschitz variant only).
    pub m2: Option<f64>,
}

impl BoundInputs {
    /// Defaults: M = B = 1, Λ = 0, c_d = 2√d, ε = 1/√n.
    pub fn new(n: u64, gamma: f64, d: usize, d_eff: f64) -> Self {
        Self {
            n,
            gamma,
            epsilon: 1.0 / (n as f64).sqrt(),
            d,
            d_eff,
            lipschitz: 1.0,
            loss_range: 1.0,
            lambda: 0.0,
            c_d: 2.0 * (d as f64).sqrt(),
            m2: None,
        }
    }

    fn validate(&self) -> Result<f64> {
        let k = kappa(self.n, self.gamma)?;
        let positive = [
            ("epsilon", self.epsilon),
            ("M", self.lipschitz),
            ("B", self.loss_range),
            ("c_d", self.c_d),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("Lambda must be nonnegative, got {}", self.lambda)));
        }
        if !(self.d_eff >= 0.0 && self.d_eff.is_finite()) {
            return Err(Error::InvalidArgument(format!("d_eff must be nonnegative, got {}", self.d_eff)));
        }
        Ok(k)
    }
}

/// Term-by-term breakdown of the log right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRhsTerms {
    pub log_c_d: f64,
    pub smoothness: f64,
    pub capacity: f64,
    pub concentration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub xi: f64,
    pub log_rhs: f64,
    pub vacuous: bool,
    pub kappa: f64,
    pub terms: LogRhsTerms,
    pub inputs: BoundInputs,
    pub variant: BoundVariant,
}

impl BoundReport {
    /// The probability bound itself, or `None` when |log_rhs| > 700.
    pub fn rhs(&self) -> Option<f64> {
        (self.log_rhs.abs() <= 700.0).then(|| self.log_rhs.exp())
    }
}

/// Error level 4Mε/√κ.
pub fn xi_n(lipschitz: f64, epsilon: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    Ok(4.0 * lipschitz * epsilon / kappa.sqrt())
}

fn report(inputs: &BoundInputs, variant: BoundVariant, kappa: f64, xi: f64, concentration: f64) -> BoundReport {
    let terms = LogRhsTerms {
        log_c_d: inputs.c_d.ln(),
        smoothness: inputs.d as f64 * (inputs.epsilon * inputs.lambda).ln_1p(),
        capacity: 0.5 * inputs.d_eff * kappa.ln(),
        concentration,
    };
    let log_rhs = terms.log_c_d + terms.smoothness + terms.capacity + terms.concentration;
    BoundReport { xi, log_rhs, vacuous: log_rhs >= 0.0, kappa, terms, inputs: inputs.clone(), variant }
}

/// log of c_d (1+εΛ)^d κ^{d_eff/2} exp(−16πM²ε² log n / (B²γ)).
pub fn bound_rhs_log(inputs: &BoundInputs) -> Result<BoundReport> {
    let k = inputs.validate()?;
    let min_eps = 1.0 / (inputs.n as f64).sqrt();
    if inputs.epsilon < min_eps * (1.0 - 1e-12) {
        return Err(Error::EpsilonTooSmall { epsilon: inputs.epsilon, min: min_eps });
    }
    let xi = xi_n(inputs.lipschitz, inputs.epsilon, k)?;
    let m = inputs.lipschitz;
    let concentration = -16.0 * PI * m * m * inputs.epsilon * inputs.epsilon * (inputs.n as f64).ln()
        / (inputs.loss_range * inputs.loss_range * inputs.gamma);
    Ok(report(inputs, BoundVariant::Lipschitz, k, xi, concentration))
}

/// Log-Lipschitz loss: ξ = (2Mε/√κ)·L and exponent −(2nM²ε²/(κB²))·L²,
/// with L = log(e + √κ/(M₂ε)). Requires ε ∈ (1/√n, 1].
pub fn bound_rhs_log_loglip(inputs: &BoundInputs) -> Result<BoundReport> {
    let k = inputs.validate()?;
    let lower = 1.0 / (inputs.n as f64).sqrt();
    if !(inputs.epsilon > lower && inputs.epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange { epsilon: inputs.epsilon, lower });
    }
    let m2 = inputs
        .m2
        .ok_or_else(|| Error::InvalidArgument("log-Lipschitz bound needs M2".into()))?;
    if !(m2 > 0.0) {
        return Err(Error::InvalidArgument(format!("M2 must be positive, got {m2}")));
    }
    let m = inputs.lipschitz;
    let eps = inputs.epsilon;
    let log_factor = (E + k.sqrt() / (m2 * eps)).ln();
    let xi = 2.0 * m * eps / k.sqrt() * log_factor;
    let concentration = -(2.0 * inputs.n as f64 * m * m * eps * eps / (k * inputs.loss_range * inputs.loss_range))
        * log_factor
        * log_factor;
    Ok(report(inputs, BoundVariant::LogLipschitz, k, xi, concentration))
}

/// Reference rows for an MNIST MLP (d ≈ 10⁵, γ = 0.003, ε = 1/√n,
/// B = M = 1): (n, d_eff, ξ, log RHS). Kept as metadata for comparison.
pub const REFERENCE_BOUND_ROWS: [(u64, f64, f64, f64); 5] = [
    (500_000, 23_474.0, 0.00132, -98_507.0),
    (1_000_000, 25_285.0, 0.00068, -91_345.0),
    (2_000_000, 27_594.0, 0.00034, -79_921.0),
    (5_000_000, 31_106.0, 0.00014, -59_307.0),
    (10_000_000, 33_933.0, 0.00007, -40_316.0),
];

/// Parameter count of the reference model.
pub const REFERENCE_BOUND_D: usize = 100_000;
