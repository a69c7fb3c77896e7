use std::path::PathBuf;

use clap::{Args, ValueEnum};
use effdim::train::{
    summarize, sweep_model_size, sweep_randomization, ExperimentRecord, GroupSummary, SweepConfig, TrainConfig,
    RANDOM_SWEEP_EPOCHS, SIZE_SWEEP_EPOCHS,
};
use serde::Serialize;

use super::{FisherArgs, ModeArg};
use crate::dataset::DatasetArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::ManifestBuilder;
use crate::output::{csv_bytes, num, parse_list, sibling, write_atomic};

pub const SWEEP_HEADER: [&str; 13] = [
    "experiment",
    "d",
    "fraction",
    "seed",
    "epochs",
    "train_error",
    "test_error",
    "ed",
    "normalized_ed",
    "n",
    "gamma",
    "epsilon",
    "mode",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "experiment",
    "d",
    "fraction",
    "count",
    "mean_train_error",
    "std_train_error",
    "mean_test_error",
    "std_test_error",
    "mean_normalized_ed",
    "std_normalized_ed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KindArg {
    Size,
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Hidden widths for the size sweep; both hidden layers use the width.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Randomized-label fractions for the random sweep.
    #[arg(long)]
    pub fractions: Option<String>,
    /// Two hidden widths for the random sweep.
    #[arg(long, default_value = "16,16")]
    pub hidden: String,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Epoch cap; 200 for size sweeps and 600 for random sweeps by default.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: u64,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// Base seed; repeat r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long)]
    pub no_early_stop: bool,
    #[command(flatten)]
    pub fisher: FisherArgs,
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Per-cell CSV. The dataset defaults to moons.
    #[arg(long)]
    pub out: PathBuf,
    /// Group summary CSV; defaults to `<out>.summary.csv`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn record_row(r: &ExperimentRecord) -> Vec<String> {
    vec![
        r.experiment.as_str().into(),
        r.d.to_string(),
        num(r.fraction),
        r.seed.to_string(),
        r.epochs.to_string(),
        num(r.train_error),
        num(r.test_error),
        num(r.ed),
        num(r.normalized_ed),
        r.n.to_string(),
        num(r.gamma),
        num(r.epsilon),
        r.mode.as_str().into(),
    ]
}

fn summary_row(g: &GroupSummary) -> Vec<String> {
    vec![
        g.experiment.as_str().into(),
        g.d.to_string(),
        num(g.fraction),
        g.count.to_string(),
        num(g.mean_train_error),
        num(g.std_train_error),
        num(g.mean_test_error),
        num(g.std_test_error),
        num(g.mean_normalized_ed),
        num(g.std_normalized_ed),
    ]
}

pub fn run(mut args: SweepArgs) -> CliResult<()> {
    args.data.dataset.get_or_insert_with(|| "moons".into());
    let mut manifest = ManifestBuilder::start("sweep", &args);
    let data = args.data.load()?;
    manifest.inputs(data.digests.clone());
    let (input, classes) = (data.train.input_dim(), data.train.num_classes);
    let param_count = |h1: usize, h2: usize| (input + 1) * h1 + (h1 + 1) * h2 + (h2 + 1) * classes;
    let default_epochs = match args.kind {
        KindArg::Size => SIZE_SWEEP_EPOCHS,
        KindArg::Random => RANDOM_SWEEP_EPOCHS,
    };
    let train = TrainConfig {
        epochs: args.epochs.unwrap_or(default_epochs),
        batch_size: args.batch as usize,
        learning_rate: args.lr,
        seed: args.seed,
        stop_at_zero_train_error: !args.no_early_stop,
    };
    let mut config = SweepConfig::new(train, args.repeats as usize);
    config.gamma = args.gamma;
    config.mode = args.mode.into();
    config.theta_samples = args.samples as usize;
    let records = match args.kind {
        KindArg::Size => {
            let sizes: Vec<usize> = parse_list("sizes", args.sizes.as_deref().unwrap_or(""))?;
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(CliError::Usage("--sizes needs at least one positive width".into()));
            }
            let max_d = sizes.iter().map(|&w| param_count(w, w)).max().unwrap_or(0);
            config.fisher = settings(&args.fisher, max_d);
            sweep_model_size(&sizes, &data.train, &data.test, &config)?
        }
        KindArg::Random => {
            let fractions: Vec<f64> = parse_list("fractions", args.fractions.as_deref().unwrap_or(""))?;
            if fractions.is_empty() {
                return Err(CliError::Usage("--fractions needs at least one value".into()));
            }
            let hidden: Vec<usize> = parse_list("hidden", &args.hidden)?;
            let &[h1, h2] = hidden.as_slice() else {
                return Err(CliError::Usage("--hidden takes exactly two widths".into()));
            };
            if h1 == 0 || h2 == 0 {
                return Err(CliError::Usage("--hidden needs positive widths".into()));
            }
            config.fisher = settings(&args.fisher, param_count(h1, h2));
            sweep_randomization(&fractions, (h1, h2), &data.train, &data.test, &config)?
        }
    };
    manifest.resolved(&config);
    let rows: Vec<Vec<String>> = records.iter().map(record_row).collect();
    write_atomic(&args.out, &csv_bytes(&SWEEP_HEADER, &rows)?)?;
    manifest.output(&args.out);
    let groups = summarize(&records);
    let summary_path = args.summary.clone().unwrap_or_else(|| sibling(&args.out, "summary.csv"));
    let summary: Vec<Vec<String>> = groups.iter().map(summary_row).collect();
    write_atomic(&summary_path, &csv_bytes(&SUMMARY_HEADER, &summary)?)?;
    manifest.output(&summary_path);
    manifest.finish(&args.out)?;
    println!("{:>8} {:>8} {:>6} {:>22} {:>22}", "d", "fraction", "count", "test error", "normalized ed");
    for g in &groups {
        println!(
            "{:>8} {:>8.3} {:>6} {:>10.5} ± {:<9.5} {:>10.5} ± {:<9.5}",
            g.d, g.fraction, g.count, g.mean_test_error, g.std_test_error, g.mean_normalized_ed, g.std_normalized_ed
        );
    }
    Ok(())
}

fn settings(fisher: &FisherArgs, max_d: usize) -> effdim::effdim::FisherSettings {
    let (s, notes) = fisher.settings(max_d);
    for note in notes {
        eprintln!("note: {note}");
    }
    s
}
