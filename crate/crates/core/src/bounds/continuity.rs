//! Quantities controlling how far the effective dimension moves when the
//! Fisher field is perturbed.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ball::{sample_ball, BallSpec};
use crate::error::{Error, Result};
use crate::fisher::{log_spd, normalize, sqrt_psd, FisherOperator, FisherRepr, Region, Spectrum};
use crate::params::ParamPoint;

/// log((1/k) Σ exp(vᵢ)), shifted by the maximum. −∞ entries are allowed.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + (sum / values.len() as f64).ln()
}

fn check_equal_lengths(spectra: &[Spectrum]) -> Result<usize> {
    let d = spectra.first().ok_or(Error::Empty("spectra"))?.len();
    if let Some(bad) = spectra.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }
    Ok(d)
}

fn half_log_det(spectrum: &Spectrum, shift: f64) -> f64 {
    0.5 * spectrum.values().iter().map(|v| (v + shift).ln()).sum::<f64>()
}

/// log φ: log of the sample mean of √det F̄. −∞ when every sample is singular.
fn log_phi(spectra: &[Spectrum]) -> f64 {
    let logs: Vec<f64> = spectra.iter().map(|s| half_log_det(s, 0.0)).collect();
    log_mean_exp(&logs)
}

/// φ = mean over samples of √det F̄; singular samples contribute 0.
pub fn continuity_phi(spectra: &[Spectrum]) -> Result<f64> {
    check_equal_lengths(spectra)?;
    Ok(log_phi(spectra).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi {
    /// max of the two terms; +∞ when φ = 0.
    pub value: f64,
    /// log mean √det(I + F̄).
    pub log_det_shifted: f64,
    /// −log φ.
    pub neg_log_phi: f64,
    pub infinite: bool,
}

pub fn continuity_psi(spectra: &[Spectrum]) -> Result<Psi> {
    check_equal_lengths(spectra)?;
    let shifted: Vec<f64> = spectra.iter().map(|s| half_log_det(s, 1.0)).collect();
    let log_det_shifted = log_mean_exp(&shifted);
    let neg_log_phi = -log_phi(spectra);
    let value = log_det_shifted.max(neg_log_phi);
    Ok(Psi { value, log_det_shifted, neg_log_phi, infinite: value.is_infinite() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityBound {
    pub value: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub psi_a: f64,
    pub psi_b: f64,
    pub infinite: bool,
}

/// C_d (1/φ(F) + 1/φ(F'))·max‖√F̄ − √F̄'‖ + (2ψ(F) + 2ψ(F'))/log κ.
pub fn continuity_bound(
    spectra_a: &[Spectrum],
    spectra_b: &[Spectrum],
    sqrt_diff_max: f64,
    c_d: f64,
    kappa: f64,
) -> Result<ContinuityBound> {
    let da = check_equal_lengths(spectra_a)?;
    let db = check_equal_lengths(spectra_b)?;
    if da != db {
        return Err(Error::DimensionMismatch { expected: da, got: db });
    }
    if !(sqrt_diff_max >= 0.0) || !(c_d > 0.0) || !(kappa > 1.0) {
        return Err(Error::InvalidArgument("need sqrt_diff_max >= 0, C_d > 0 and kappa > 1".into()));
    }
    let phi_a = continuity_phi(spectra_a)?;
    let phi_b = continuity_phi(spectra_b)?;
    let psi_a = continuity_psi(spectra_a)?.value;
    let psi_b = continuity_psi(spectra_b)?.value;
    let value = if phi_a == 0.0 || phi_b == 0.0 {
        f64::INFINITY
    } else {
        c_d * (1.0 / phi_a + 1.0 / phi_b) * sqrt_diff_max + (2.0 * psi_a + 2.0 * psi_b) / kappa.ln()
    };
    Ok(ContinuityBound { value, phi_a, phi_b, psi_a, psi_b, infinite: value.is_infinite() })
}

fn normalized_dense(field: &[FisherOperator]) -> Result<Vec<DMatrix<f64>>> {
    let mats = field
        .iter()
        .map(|op| match op.repr() {
            FisherRepr::Dense(m) => Ok(m.clone()),
            _ => Err(Error::InvalidArgument("matrix square roots need dense Fisher matrices".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let traces: Vec<Spectrum> = field.iter().map(|op| op.spectrum()).collect::<Result<_>>()?;
    let (_, k) = normalize(&traces, Region::Point)?;
    Ok(mats.into_iter().map(|m| m * k.value).collect())
}

/// max over matched samples of ‖√F̄(θ) − √F̄'(θ)‖_F, each field normalized
/// by its own mean trace.
pub fn sqrt_diff_max(field_a: &[FisherOperator], field_b: &[FisherOperator]) -> Result<f64> {
    if field_a.len() != field_b.len() {
        return Err(Error::DimensionMismatch { expected: field_a.len(), got: field_b.len() });
    }
    let a = normalized_dense(field_a)?;
    let b = normalized_dense(field_b)?;
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(&b) {
        if x.shape() != y.shape() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), got: y.nrows() });
        }
        worst = worst.max((sqrt_psd(x)? - sqrt_psd(y)?).norm());
    }
    Ok(worst)
}

/// Sampled estimate of Λ = max ‖∇θ log F̄(θ)‖ over a ball. Not a supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub samples: usize,
    pub step: f64,
    /// Norm of the d×d×d derivative tensor.
    pub norm: String,
}

/// Central differences of the matrix log of F(θ), Frobenius norm over all
/// three tensor indices, maximized over `samples` uniform ball points.
///
/// The normalization constant is θ-independent, so ∇ log F̄ = ∇ log F.
pub fn estimate_lambda<F>(fisher: F, ball: &BallSpec, samples: usize, seed: u64, step: f64) -> Result<LambdaEstimate>
where
    F: Fn(&ParamPoint) -> Result<DMatrix<f64>>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let floor = 1e-300;
    let points = sample_ball(ball, samples, seed)?;
    let mut worst: f64 = 0.0;
    for p in &points {
        let mut total = 0.0;
        for k in 0..p.dim() {
            let mut up = p.values().to_vec();
            let mut down = up.clone();
            up[k] += step;
            down[k] -= step;
            let lu = log_spd(&fisher(&p.with_values(up)?)?, floor)?;
            let ld = log_spd(&fisher(&p.with_values(down)?)?, floor)?;
            total += ((lu - ld) / (2.0 * step)).norm_squared();
        }
        worst = worst.max(total.sqrt());
    }
    Ok(LambdaEstimate { value: worst, samples, step, norm: "frobenius".into() })
}
