use std::path::PathBuf;

use clap::Args;
use effdim::models::{MlpModel, StatisticalModel, DEFAULT_NEGATIVE_SLOPE};
use effdim::train::{generalization_error, train_mlp, TrainConfig};
use serde::Serialize;

use crate::checkpoint::{Checkpoint, TrainingMeta};
use crate::dataset::DatasetArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_name, ManifestBuilder};
use crate::output::{csv_bytes, num, sibling, write_atomic, write_json};

pub const LOG_HEADER: [&str; 3] = ["epoch", "loss", "train_error"];

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Hidden layer widths, e.g. 16,16.
    #[arg(long, value_delimiter = ',', required = true)]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: u64,
    #[arg(long, default_value_t = DEFAULT_NEGATIVE_SLOPE)]
    pub negative_slope: f64,
    /// Keep training after the training error reaches zero.
    #[arg(long)]
    pub no_early_stop: bool,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch CSV; defaults to `<out>.log.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::start("train", &args);
    if args.hidden.is_empty() || args.hidden.contains(&0) {
        return Err(CliError::Usage("--hidden needs positive widths".into()));
    }
    let data = args.data.load()?;
    manifest.inputs(data.digests.clone());
    let mut widths = vec![data.train.input_dim()];
    widths.extend(&args.hidden);
    widths.push(data.train.num_classes);
    let model = MlpModel::new(widths, args.negative_slope)?;
    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch as usize,
        learning_rate: args.lr,
        seed: args.seed,
        stop_at_zero_train_error: !args.no_early_stop,
    };
    manifest.resolved(&config);
    let (theta, log) = train_mlp(&model, &data.train, &config)?;
    let test_error = generalization_error(&model, &theta, &data.test)?;
    let last = log.last().copied();
    let checkpoint = Checkpoint {
        arch: model.architecture(),
        params: theta.values().to_vec(),
        seed: args.seed,
        training: TrainingMeta {
            config,
            dataset: args.data.clone(),
            train_size: data.train.len(),
            epochs_run: log.epochs_run(),
            final_loss: last.map_or(f64::NAN, |e| e.loss),
            final_train_error: last.map_or(f64::NAN, |e| e.train_error),
            test_error,
        },
        manifest: manifest_name(&args.out),
    };
    write_json(&args.out, &checkpoint)?;
    manifest.output(&args.out);
    let log_path = args.log.clone().unwrap_or_else(|| sibling(&args.out, "log.csv"));
    let rows: Vec<Vec<String>> =
        log.epochs.iter().map(|e| vec![e.epoch.to_string(), num(e.loss), num(e.train_error)]).collect();
    write_atomic(&log_path, &csv_bytes(&LOG_HEADER, &rows)?)?;
    manifest.output(&log_path);
    manifest.finish(&args.out)?;
    println!(
        "d = {}, epochs = {}, train error = {}, test error = {}",
        checkpoint.params.len(),
        checkpoint.training.epochs_run,
        checkpoint.training.final_train_error,
        test_error
    );
    Ok(())
}
