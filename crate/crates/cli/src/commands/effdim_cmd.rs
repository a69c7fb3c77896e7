use std::path::PathBuf;

use clap::Args;
use effdim::config::{EdConfig, IntegrationMode};
use effdim::effdim::{local_effective_dimension, EdResult, FisherMethod, FisherSettings, MidpointTrace};
use effdim::fisher::DenseEstimator;
use effdim::models::{GaussianLocationModel, MlpModel, RegressionData, StatisticalModel};
use effdim::params::ParamPoint;
use serde::Serialize;

use super::{FisherArgs, ModeArg};
use crate::checkpoint::Checkpoint;
use crate::dataset::DatasetArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_name, InputDigest, ManifestBuilder};
use crate::output::{append_csv, num, write_json};

pub const ED_HEADER: [&str; 11] =
    ["model", "d", "n", "gamma", "epsilon", "mode", "samples", "kappa", "ed", "normalized_ed", "representation"];

#[derive(Debug, Clone, Args, Serialize)]
pub struct EffdimArgs {
    /// Checkpoint path, or `gaussian` for the constant-Fisher toy model.
    #[arg(long)]
    pub model: String,
    /// Dimension of the Gaussian toy model.
    #[arg(long, default_value_t = 3)]
    pub gaussian_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Sample count in κ; defaults to the training-set size.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Ball radius; defaults to 1/√n.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub mode: ModeArg,
    /// Parameter samples in mc mode.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub fisher: FisherArgs,
    /// Result JSON path.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV that receives one appended row per run.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EffdimReport<'a> {
    model: String,
    d: usize,
    fisher: FisherSettings,
    notes: Vec<String>,
    result: &'a EdResult,
    manifest: String,
}

fn ed_config(args: &EffdimArgs, n: u64) -> CliResult<EdConfig> {
    let mut cfg = EdConfig::new(n, args.gamma)?
        .with_mode(IntegrationMode::from(args.mode))
        .with_theta_samples(args.samples as usize)
        .with_seed(args.seed);
    if let Some(eps) = args.epsilon {
        cfg = cfg.with_epsilon(eps)?;
    }
    Ok(cfg)
}

pub fn run(args: EffdimArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::start("effdim", &args);
    let (label, d, result, settings, notes) = if args.model == "gaussian" {
        if args.gaussian_dim == 0 {
            return Err(CliError::Usage("--gaussian-dim must be positive".into()));
        }
        let n = args.n.ok_or_else(|| CliError::Usage("--n is required for the gaussian model".into()))?;
        let cfg = ed_config(&args, n)?;
        if !(args.sigma > 0.0 && args.sigma.is_finite()) {
            return Err(CliError::Usage(format!("--sigma must be positive, got {}", args.sigma)));
        }
        let model = GaussianLocationModel::new(args.gaussian_dim, args.sigma);
        let theta = ParamPoint::zeros(model.architecture());
        let settings = FisherSettings {
            method: FisherMethod::Dense { estimator: DenseEstimator::Analytic },
            midpoint_trace: MidpointTrace::SinglePoint,
        };
        let empty = RegressionData { inputs: Vec::new(), targets: Vec::new() };
        let result = local_effective_dimension(&model, &theta, &empty, &cfg, &settings)?;
        ("gaussian".to_string(), model.param_count(), result, settings, Vec::new())
    } else {
        let path = PathBuf::from(&args.model);
        let (ck, bytes) = Checkpoint::read(&path)?;
        manifest.inputs([InputDigest::of(&path, &bytes)]);
        let model = MlpModel::from_architecture(&ck.arch)?;
        let theta = ck.point()?;
        let dataset = if args.data.is_set() { &args.data } else { &ck.training.dataset };
        let data = dataset.load()?;
        manifest.inputs(data.digests.clone());
        let n = args.n.unwrap_or(data.train.len() as u64);
        let cfg = ed_config(&args, n)?;
        let d = model.param_count();
        let (settings, notes) = args.fisher.settings(d);
        for note in &notes {
            eprintln!("note: {note}");
        }
        let result = local_effective_dimension(&model, &theta, &data.train, &cfg, &settings)?;
        (args.model.clone(), d, result, settings, notes)
    };
    manifest.resolved(&result.config);
    let report =
        EffdimReport { model: label.clone(), d, fisher: settings, notes, result: &result, manifest: manifest_name(&args.out) };
    write_json(&args.out, &report)?;
    manifest.output(&args.out);
    if let Some(csv) = &args.csv {
        let row = vec![
            label,
            d.to_string(),
            result.config.n.to_string(),
            num(result.config.gamma),
            num(result.config.epsilon),
            result.mode.as_str().to_string(),
            result.sample_count.to_string(),
            num(result.kappa),
            num(result.ed),
            num(result.normalized_ed),
            result.representation.clone(),
        ];
        append_csv(csv, &ED_HEADER, &[row])?;
        manifest.output(csv);
    }
    manifest.finish(&args.out)?;
    println!("ed = {}, normalized = {}, kappa = {}", result.ed, result.normalized_ed, result.kappa);
    Ok(())
}
