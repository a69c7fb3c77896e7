use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues of a PSD operator, nonnegative and sorted nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    /// Largest magnitude of a negative eigenvalue that was clamped to zero.
    clamped: f64,
}

impl Spectrum {
    /// Checked constructor: every entry must be finite and ≥ 0. Sorts.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(&value) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::NegativeEigenvalue { value });
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values, clamped: 0.0 })
    }

    /// Clamps negative entries to zero and records the largest clamp.
    pub fn from_raw(mut values: Vec<f64>) -> Self {
        let mut clamped: f64 = 0.0;
        for v in values.iter_mut() {
            if *v < 0.0 {
                clamped = clamped.max(-*v);
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values, clamped }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn clamped(&self) -> f64 {
        self.clamped
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect(), clamped: self.clamped * factor }
    }

    pub(crate) fn record_clamp(&mut self, magnitude: f64) {
        self.clamped = self.clamped.max(magnitude);
    }

    /// Entries above `rel_tol · trace`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.trace();
        self.values.iter().filter(|v| **v > cut).count()
    }
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigendecomposition; fails loudly rather than truncating.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let dim = m.nrows();
    if dim != m.ncols() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    SymmetricEigen::try_new(symmetrize(m), f64::EPSILON, 100 * dim + 1000)
        .ok_or(Error::EigenNoConvergence { dim })
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(m)?.eigenvalues.iter().copied().collect())
}

/// Principal square root V·√Λ·Vᵀ of a PSD matrix (negative eigenvalues clamped).
pub fn sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(m)?;
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Matrix logarithm of an SPD matrix, eigenvalues floored at `floor`.
pub fn log_spd(m: &DMatrix<f64>, floor: f64) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(m)?;
    let logs = eig.eigenvalues.map(|v| v.max(floor).ln());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&logs) * v.transpose())
}
