//! Global and local effective dimension from normalized Fisher spectra.
//!
//! With z(θ) = ½ Σᵢ log(1 + κ λ̄ᵢ(θ)) and ζ = maxθ z(θ), the effective dimension is
//!
//! ```text
//! d = 2ζ / log κ + (2 / log κ) · log( mean_θ exp(z(θ) − ζ) )
//! ```
//!
//! which never forms the exponentially large determinant.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{sample_ball, BallSpec};
use crate::config::{kappa, ConfigWarning, EdConfig, IntegrationMode};
use crate::error::{Error, Result};
use crate::fisher::{
    dense_fisher, kfac_factors, normalize, DenseEstimator, EstimatorTag, FisherOperator, LabelSource,
    NormalizationConstant, Region, Spectrum, DENSE_LIMIT,
};
use crate::models::{MlpModel, Observations, StatisticalModel};
use crate::params::ParamPoint;
use crate::rng;

/// Largest dimension for which the global (hypercube) quantity is offered.
pub const GLOBAL_DIM_LIMIT: usize = 20;

/// ½ Σ log(1 + κλ) for one normalized spectrum.
pub fn z_value(eigenvalues: &[f64], kappa: f64) -> Result<f64> {
    if !(kappa > 1.0) {
        return Err(Error::InvalidArgument(format!("kappa must exceed 1, got {kappa}")));
    }
    let mut z = 0.0;
    for &v in eigenvalues {
        if !(v >= 0.0) {
            return Err(Error::NegativeEigenvalue { value: v });
        }
        z += (kappa * v).ln_1p();
    }
    Ok(0.5 * z)
}

/// Shifted log-mean-exp of the z-values: returns (ed, z-values, ζ).
pub fn effective_dimension_from_kappa(spectra: &[Spectrum], kappa: f64) -> Result<(f64, Vec<f64>, f64)> {
    let first = spectra.first().ok_or(Error::Empty("spectra"))?;
    if let Some(bad) = spectra.iter().find(|s| s.len() != first.len()) {
        return Err(Error::DimensionMismatch { expected: first.len(), got: bad.len() });
    }
    let z: Vec<f64> = spectra.iter().map(|s| z_value(s.values(), kappa)).collect::<Result<_>>()?;
    let zeta = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean_shifted = z.iter().map(|v| (v - zeta).exp()).sum::<f64>() / z.len() as f64;
    let log_k = kappa.ln();
    let ed = 2.0 * zeta / log_k + 2.0 / log_k * mean_shifted.ln();
    Ok((ed.max(0.0), z, zeta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdResult {
    pub ed: f64,
    pub normalized_ed: f64,
    pub d: usize,
    pub kappa: f64,
    pub z_values: Vec<f64>,
    pub zeta: f64,
    pub mode: IntegrationMode,
    pub sample_count: usize,
    pub region: Region,
    pub config: EdConfig,
    pub normalization: Option<NormalizationConstant>,
    pub estimator: Option<EstimatorTag>,
    /// "dense", "kfac" or "spectrum".
    pub representation: String,
    pub warnings: Vec<ConfigWarning>,
}

/// Effective dimension of already-normalized spectra, one per θ sample.
pub fn effective_dimension(spectra: &[Spectrum], config: &EdConfig) -> Result<EdResult> {
    config.validate()?;
    let kappa = config.kappa()?;
    let (ed, z_values, zeta) = effective_dimension_from_kappa(spectra, kappa)?;
    let d = spectra[0].len();
    let mode = if spectra.len() == 1 { IntegrationMode::Midpoint } else { IntegrationMode::MonteCarlo };
    Ok(EdResult {
        ed,
        normalized_ed: ed / d as f64,
        d,
        kappa,
        z_values,
        zeta,
        mode,
        sample_count: spectra.len(),
        region: Region::Ball { radius: config.epsilon },
        config: config.clone(),
        normalization: None,
        estimator: None,
        representation: "spectrum".into(),
        warnings: config.warnings(),
    })
}

/// How Fisher information is obtained at each parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum FisherMethod {
    Dense { estimator: DenseEstimator },
    Kfac { labels: LabelSource },
    /// Dense up to [`DENSE_LIMIT`] parameters, K-FAC above.
    Auto { estimator: DenseEstimator, labels: LabelSource },
}

/// Trace used to normalize a midpoint evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MidpointTrace {
    /// d / tr F(θ⋆).
    SinglePoint,
    /// Mean trace over `theta_samples` ball points; the spectrum is still θ⋆'s.
    BallSampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherSettings {
    pub method: FisherMethod,
    pub midpoint_trace: MidpointTrace,
}

impl Default for FisherSettings {
    fn default() -> Self {
        Self {
            method: FisherMethod::Auto {
                estimator: DenseEstimator::Sampled { labels_per_input: 1, seed: 0 },
                labels: LabelSource::Sampled { seed: 0 },
            },
            midpoint_trace: MidpointTrace::SinglePoint,
        }
    }
}

impl FisherSettings {
    pub fn dense(estimator: DenseEstimator) -> Self {
        Self { method: FisherMethod::Dense { estimator }, midpoint_trace: MidpointTrace::SinglePoint }
    }

    pub fn kfac(labels: LabelSource) -> Self {
        Self { method: FisherMethod::Kfac { labels }, midpoint_trace: MidpointTrace::SinglePoint }
    }
}

/// Fisher operator at one parameter point according to `method`.
pub fn evaluate_fisher<M>(model: &M, theta: &ParamPoint, data: &dyn Observations, method: FisherMethod) -> Result<FisherOperator>
where
    M: StatisticalModel + ?Sized,
{
    let use_kfac = match method {
        FisherMethod::Dense { .. } => false,
        FisherMethod::Kfac { .. } => true,
        FisherMethod::Auto { .. } => theta.dim() > DENSE_LIMIT,
    };
    match (method, use_kfac) {
        (FisherMethod::Dense { estimator }, _) | (FisherMethod::Auto { estimator, .. }, false) => {
            dense_fisher(model, theta, data, estimator)
        }
        (FisherMethod::Kfac { labels }, _) | (FisherMethod::Auto { labels, .. }, true) => {
            let mlp = MlpModel::from_architecture(theta.arch())?;
            kfac_factors(&mlp, theta, data, labels)
        }
    }
}

fn representation_name(op: &FisherOperator) -> &'static str {
    match op.repr() {
        crate::fisher::FisherRepr::Dense(_) => "dense",
        crate::fisher::FisherRepr::Kronecker(_) => "kfac",
        crate::fisher::FisherRepr::Spectrum(_) => "spectrum",
    }
}

/// Raw spectra at each point, plus the estimator tag and representation of the first.
fn spectra_at<M>(model: &M, points: &[ParamPoint], data: &dyn Observations, method: FisherMethod) -> Result<(Vec<Spectrum>, EstimatorTag, &'static str)>
where
    M: StatisticalModel + ?Sized,
{
    let ops: Vec<(Spectrum, EstimatorTag, &'static str)> = points
        .par_iter()
        .map(|p| {
            let op = evaluate_fisher(model, p, data, method)?;
            Ok((op.spectrum()?, op.estimator(), representation_name(&op)))
        })
        .collect::<Result<_>>()?;
    let (tag, repr) = (ops[0].1, ops[0].2);
    Ok((ops.into_iter().map(|o| o.0).collect(), tag, repr))
}

/// Local effective dimension around θ⋆.
///
/// Midpoint mode evaluates one Fisher at θ⋆. Monte-Carlo mode draws
/// `theta_samples` uniform ball points and normalizes by their shared mean
/// trace.
pub fn local_effective_dimension<M>(
    model: &M,
    theta_star: &ParamPoint,
    data: &dyn Observations,
    config: &EdConfig,
    settings: &FisherSettings,
) -> Result<EdResult>
where
    M: StatisticalModel + ?Sized,
{
    config.validate()?;
    if theta_star.dim() != model.param_count() {
        return Err(Error::DimensionMismatch { expected: model.param_count(), got: theta_star.dim() });
    }
    let ball = BallSpec::new(theta_star.clone(), config.epsilon)?;
    let (spectra, normalization, tag, repr) = match config.mode {
        IntegrationMode::Midpoint => {
            let (center, tag, repr) = spectra_at(model, std::slice::from_ref(theta_star), data, settings.method)?;
            match settings.midpoint_trace {
                MidpointTrace::SinglePoint => {
                    let (normed, k) = normalize(&center, Region::Point)?;
                    (normed, k, tag, repr)
                }
                MidpointTrace::BallSampled => {
                    let points = sample_ball(&ball, config.theta_samples, config.seed)?;
                    let (around, _, _) = spectra_at(model, &points, data, settings.method)?;
                    let (_, k) = normalize(&around, Region::Ball { radius: config.epsilon })?;
                    (vec![center[0].scaled(k.value)], k, tag, repr)
                }
            }
        }
        IntegrationMode::MonteCarlo => {
            let points = sample_ball(&ball, config.theta_samples, config.seed)?;
            let (raw, tag, repr) = spectra_at(model, &points, data, settings.method)?;
            let (normed, k) = normalize(&raw, Region::Ball { radius: config.epsilon })?;
            (normed, k, tag, repr)
        }
    };
    let mut result = effective_dimension(&spectra, config)?;
    result.mode = config.mode;
    result.normalization = Some(normalization);
    result.estimator = Some(tag);
    result.representation = repr.into();
    Ok(result)
}

/// Global effective dimension over Θ = [−1, 1]^d by uniform hypercube sampling.
///
/// Only offered for d ≤ [`GLOBAL_DIM_LIMIT`].
pub fn global_effective_dimension<M>(
    model: &M,
    data: &dyn Observations,
    n: u64,
    gamma: f64,
    samples: usize,
    seed: u64,
    settings: &FisherSettings,
) -> Result<EdResult>
where
    M: StatisticalModel + ?Sized,
{
    let d = model.param_count();
    if d > GLOBAL_DIM_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "global effective dimension is limited to d <= {GLOBAL_DIM_LIMIT}, model has {d}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let kappa = kappa(n, gamma)?;
    let arch = model.architecture();
    let points: Vec<ParamPoint> = (0..samples as u64)
        .map(|i| {
            let mut r = rng::stream(seed, i);
            ParamPoint::new((0..d).map(|_| r.random_range(-1.0..=1.0)).collect(), arch.clone())
        })
        .collect::<Result<_>>()?;
    let (raw, tag, repr) = spectra_at(model, &points, data, settings.method)?;
    let (normed, k) = normalize(&raw, Region::Hypercube)?;
    let (ed, z_values, zeta) = effective_dimension_from_kappa(&normed, kappa)?;
    Ok(EdResult {
        ed,
        normalized_ed: ed / d as f64,
        d,
        kappa,
        z_values,
        zeta,
        mode: IntegrationMode::MonteCarlo,
        sample_count: samples,
        region: Region::Hypercube,
        config: EdConfig {
            n,
            gamma,
            epsilon: 1.0,
            mode: IntegrationMode::MonteCarlo,
            theta_samples: samples,
            seed,
        },
        normalization: Some(k),
        estimator: Some(tag),
        representation: repr.into(),
        warnings: Vec::new(),
    })
}

/// Default hypercube sample count for the global quantity: 10·d.
pub fn default_global_samples(d: usize) -> usize {
    10 * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GaussianLocationModel, RegressionData};

    fn spectrum(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn z_value_examples() {
        // ½(ln 9 + ln 25)
        assert!((z_value(&[1.0, 3.0], 8.0).unwrap() - 2.708_050_201_102_21).abs() < 1e-12);
        assert_eq!(z_value(&[0.0; 4], 8.0).unwrap(), 0.0);
        let k = std::f64::consts::E.powi(2) - 1.0;
        assert!((z_value(&[1.0], k).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(z_value(&[-1e-3], 8.0), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn identity_closed_form() {
        let (ed, _, _) = effective_dimension_from_kappa(&[spectrum(&[1.0; 4])], 100.0).unwrap();
        assert!((ed - 4.008_642_747_565_285).abs() < 1e-10);
        let (ed, _, _) = effective_dimension_from_kappa(&[spectrum(&[2.0, 0.0])], 100.0).unwrap();
        assert!((ed - 1.151_598_028_710_244).abs() < 1e-10);
    }

    #[test]
    fn permutation_invariance() {
        let a = spectrum(&[3.0, 1.0, 0.5]);
        let b = spectrum(&[0.2, 2.0, 0.8]);
        let c = spectrum(&[1.5, 1.5, 1.5]);
        let (x, _, _) = effective_dimension_from_kappa(&[a.clone(), b.clone(), c.clone()], 50.0).unwrap();
        let (y, _, _) = effective_dimension_from_kappa(&[c, a, b], 50.0).unwrap();
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn zeta_is_max_and_normalized_is_ratio() {
        let cfg = EdConfig::new(1000, 1.0).unwrap();
        let r = effective_dimension(&[spectrum(&[1.0, 1.0]), spectrum(&[2.0, 0.0])], &cfg).unwrap();
        assert_eq!(r.zeta, r.z_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        assert!((r.normalized_ed - r.ed / 2.0).abs() < 1e-12);
        assert_eq!(r.mode, IntegrationMode::MonteCarlo);
        assert!(effective_dimension(&[], &cfg).is_err());
    }

    #[test]
    fn huge_z_values_do_not_overflow() {
        // d = 10^7 with all-ones spectrum: z ~ 10^7, exp(z) overflows
        let s = Spectrum::new(vec![1.0; 10_000_000]).unwrap();
        let (ed, _, zeta) = effective_dimension_from_kappa(&[s.clone(), s], 1e4).unwrap();
        assert!(zeta > 1e6);
        let expected = 1e7 * (1e4f64).ln_1p() / (1e4f64).ln();
        assert!((ed - expected).abs() / expected < 1e-10);
    }

    #[test]
    fn gaussian_midpoint_equals_monte_carlo() {
        let model = GaussianLocationModel::new(3, 0.7);
        let theta = ParamPoint::new(vec![0.1, 0.2, -0.3], model.architecture()).unwrap();
        let data = RegressionData::default();
        let settings = FisherSettings::dense(DenseEstimator::Analytic);
        for eps in [0.05, 0.5, 3.0] {
            let base = EdConfig::new(500, 0.8).unwrap().with_epsilon(eps).unwrap();
            let mid = local_effective_dimension(&model, &theta, &data, &base, &settings).unwrap();
            let mc_cfg = base.clone().with_mode(IntegrationMode::MonteCarlo).with_theta_samples(25);
            let mc = local_effective_dimension(&model, &theta, &data, &mc_cfg, &settings).unwrap();
            assert!((mid.ed - mc.ed).abs() < 1e-10);
            let k = mid.kappa;
            assert!((mid.normalized_ed - k.ln_1p() / k.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn global_is_limited_to_small_models() {
        let model = GaussianLocationModel::new(21, 1.0);
        let settings = FisherSettings::dense(DenseEstimator::Analytic);
        let r = global_effective_dimension(&model, &RegressionData::default(), 1000, 1.0, 10, 0, &settings);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let model = GaussianLocationModel::new(2, 1.0);
        let r = global_effective_dimension(&model, &RegressionData::default(), 1000, 1.0, default_global_samples(2), 0, &settings).unwrap();
        assert_eq!(r.sample_count, 20);
        assert!((r.normalized_ed - r.kappa.ln_1p() / r.kappa.ln()).abs() < 1e-12);
    }
}
