use clap::{Args, Parser, Subcommand, ValueEnum};
use effdim::config::IntegrationMode;
use effdim::effdim::{FisherMethod, FisherSettings, MidpointTrace};
use effdim::fisher::{DenseEstimator, LabelSource, DENSE_LIMIT};
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

pub mod bound_table;
pub mod effdim_cmd;
pub mod sweep;
pub mod train;

#[derive(Debug, Parser)]
#[command(name = "effdim", version, about = "Effective dimension, Fisher spectra and generalization bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an MLP classifier and write a JSON checkpoint.
    Train(train::TrainArgs),
    /// Local effective dimension of a checkpoint or of the Gaussian toy model.
    Effdim(effdim_cmd::EffdimArgs),
    /// Tabulate the generalization bound over a list of sample sizes.
    BoundTable(bound_table::BoundTableArgs),
    /// Model-size or label-randomization sweep.
    Sweep(sweep::SweepArgs),
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(a) => train::run(a),
        Command::Effdim(a) => effdim_cmd::run(a),
        Command::BoundTable(a) => bound_table::run(a),
        Command::Sweep(a) => sweep::run(a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Midpoint,
    Mc,
}

impl From<ModeArg> for IntegrationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Midpoint => IntegrationMode::Midpoint,
            ModeArg::Mc => IntegrationMode::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toggle {
    On,
    Off,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorArg {
    Empirical,
    Sampled,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceArg {
    Single,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FisherArgs {
    /// Kronecker-factored Fisher; forced on above 4000 parameters. In a sweep
    /// the largest model decides for all.
    #[arg(long, value_enum, default_value = "auto")]
    pub kfac: Toggle,
    /// Label source for score vectors.
    #[arg(long, value_enum, default_value = "sampled")]
    pub estimator: EstimatorArg,
    /// Model-sampled labels per input (dense sampled estimator).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub labels_per_input: u64,
    #[arg(long, default_value_t = 0)]
    pub fisher_seed: u64,
    /// Normalization trace in midpoint mode.
    #[arg(long, value_enum, default_value = "single")]
    pub midpoint_trace: TraceArg,
}

impl FisherArgs {
    /// `max_d` is the largest parameter count the settings will meet.
    pub fn settings(&self, max_d: usize) -> (FisherSettings, Vec<String>) {
        let mut notes = Vec::new();
        let dense = match self.estimator {
            EstimatorArg::Empirical => DenseEstimator::Empirical,
            EstimatorArg::Sampled => {
                DenseEstimator::Sampled { labels_per_input: self.labels_per_input as usize, seed: self.fisher_seed }
            }
            EstimatorArg::Exhaustive => DenseEstimator::Exhaustive,
        };
        let labels = match self.estimator {
            EstimatorArg::Empirical => LabelSource::Empirical,
            EstimatorArg::Sampled => LabelSource::Sampled { seed: self.fisher_seed },
            EstimatorArg::Exhaustive => LabelSource::Exhaustive,
        };
        // One representation for every model the settings meet.
        let method = match self.kfac {
            Toggle::On => FisherMethod::Kfac { labels },
            _ if max_d > DENSE_LIMIT => {
                if self.kfac == Toggle::Off {
                    notes.push(format!("d = {max_d} exceeds {DENSE_LIMIT}; K-FAC forced on"));
                }
                FisherMethod::Kfac { labels }
            }
            _ => FisherMethod::Dense { estimator: dense },
        };
        let midpoint_trace = match self.midpoint_trace {
            TraceArg::Single => MidpointTrace::SinglePoint,
            TraceArg::Sampled => MidpointTrace::BallSampled,
        };
        (FisherSettings { method, midpoint_trace }, notes)
    }
}
