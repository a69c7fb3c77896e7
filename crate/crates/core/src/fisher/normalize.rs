use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};

/// Integration region for the normalization integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    /// [−1, 1]^d.
    Hypercube,
    Ball { radius: f64 },
    /// A single parameter point (midpoint evaluation).
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConstant {
    /// Multiplier applied to every raw eigenvalue: d / mean trace.
    pub value: f64,
    /// Monte-Carlo estimate of (1/V)∫ tr F(θ) dθ.
    pub trace_estimate: f64,
    pub region: Region,
}

/// Rescales every spectrum by d / (mean trace over samples).
///
/// The region volume cancels between the numerator and the Monte-Carlo
/// estimate of the integral; it is only carried for provenance.
pub fn normalize(spectra: &[Spectrum], region: Region) -> Result<(Vec<Spectrum>, NormalizationConstant)> {
    let first = spectra.first().ok_or(Error::Empty("spectra"))?;
    let d = first.len();
    if let Some(bad) = spectra.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }
    let trace_estimate = spectra.iter().map(Spectrum::trace).sum::<f64>() / spectra.len() as f64;
    if !(trace_estimate > 0.0) || !trace_estimate.is_finite() {
        return Err(Error::ZeroTrace);
    }
    let value = d as f64 / trace_estimate;
    let normalized = spectra.iter().map(|s| s.scaled(value)).collect();
    Ok((normalized, NormalizationConstant { value, trace_estimate, region }))
}
