use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean, sample_std};
use super::{generalization_error, train_mlp, TrainConfig};
use crate::config::{EdConfig, IntegrationMode};
use crate::data::{randomize_labels, LabeledDataset};
use crate::effdim::{local_effective_dimension, FisherSettings};
use crate::error::{Error, Result};
use crate::models::{MlpModel, StatisticalModel, DEFAULT_NEGATIVE_SLOPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Size,
    Random,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Size => "size",
            ExperimentKind::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// `train.seed` is the base seed; repeat r uses `seed + r`.
    pub train: TrainConfig,
    pub gamma: f64,
    pub mode: IntegrationMode,
    pub theta_samples: usize,
    pub fisher: FisherSettings,
    pub repeats: usize,
    pub negative_slope: f64,
}

impl SweepConfig {
    pub fn new(train: TrainConfig, repeats: usize) -> Self {
        Self {
            train,
            gamma: 1.0,
            mode: IntegrationMode::Midpoint,
            theta_samples: crate::config::DEFAULT_THETA_SAMPLES,
            fisher: FisherSettings::default(),
            repeats,
            negative_slope: DEFAULT_NEGATIVE_SLOPE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: ExperimentKind,
    pub d: usize,
    pub fraction: f64,
    pub seed: u64,
    pub epochs: usize,
    pub train_error: f64,
    pub test_error: f64,
    pub ed: f64,
    pub normalized_ed: f64,
    pub n: u64,
    pub gamma: f64,
    pub epsilon: f64,
    pub mode: IntegrationMode,
}

struct Cell {
    experiment: ExperimentKind,
    widths: Vec<usize>,
    fraction: f64,
    seed: u64,
}

fn run_cell(cell: &Cell, train: &LabeledDataset, test: &LabeledDataset, config: &SweepConfig) -> Result<ExperimentRecord> {
    let model = MlpModel::new(cell.widths.clone(), config.negative_slope)?;
    let data = if cell.fraction > 0.0 { randomize_labels(train, cell.fraction, cell.seed)? } else { train.clone() };
    let train_cfg = TrainConfig { seed: cell.seed, ..config.train.clone() };
    let (theta, log) = train_mlp(&model, &data, &train_cfg)?;
    let test_error = generalization_error(&model, &theta, test)?;
    let n = data.len() as u64;
    let ed_cfg = EdConfig::new(n, config.gamma)?
        .with_mode(config.mode)
        .with_theta_samples(config.theta_samples)
        .with_seed(cell.seed);
    let ed = local_effective_dimension(&model, &theta, &data, &ed_cfg, &config.fisher)?;
    Ok(ExperimentRecord {
        experiment: cell.experiment,
        d: model.param_count(),
        fraction: cell.fraction,
        seed: cell.seed,
        epochs: log.epochs_run(),
        train_error: log.last().map_or(f64::NAN, |e| e.train_error),
        test_error,
        ed: ed.ed,
        normalized_ed: ed.normalized_ed,
        n,
        gamma: config.gamma,
        epsilon: ed_cfg.epsilon,
        mode: config.mode,
    })
}

fn check_inputs(train: &LabeledDataset, test: &LabeledDataset, config: &SweepConfig) -> Result<()> {
    if config.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    config.train.validate(train.len())
}

fn run_cells(cells: Vec<Cell>, train: &LabeledDataset, test: &LabeledDataset, config: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    cells.par_iter().map(|c| run_cell(c, train, test, config)).collect()
}

/// Trains `[in, w, w, classes]` networks for each hidden width `w` and records
/// test error and midpoint local effective dimension.
pub fn sweep_model_size(
    hidden_widths: &[usize],
    train: &LabeledDataset,
    test: &LabeledDataset,
    config: &SweepConfig,
) -> Result<Vec<ExperimentRecord>> {
    check_inputs(train, test, config)?;
    if hidden_widths.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("hidden widths must be nondecreasing".into()));
    }
    let cells = hidden_widths
        .iter()
        .flat_map(|&w| {
            (0..config.repeats as u64).map(move |r| Cell {
                experiment: ExperimentKind::Size,
                widths: vec![train.input_dim(), w, w, train.num_classes],
                fraction: 0.0,
                seed: config.train.seed + r,
            })
        })
        .collect();
    run_cells(cells, train, test, config)
}

/// Fixed architecture, increasing fraction of randomized training labels.
pub fn sweep_randomization(
    fractions: &[f64],
    hidden: (usize, usize),
    train: &LabeledDataset,
    test: &LabeledDataset,
    config: &SweepConfig,
) -> Result<Vec<ExperimentRecord>> {
    check_inputs(train, test, config)?;
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || fractions.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("fractions must be nondecreasing within [0, 1]".into()));
    }
    let cells = fractions
        .iter()
        .flat_map(|&f| {
            (0..config.repeats as u64).map(move |r| Cell {
                experiment: ExperimentKind::Random,
                widths: vec![train.input_dim(), hidden.0, hidden.1, train.num_classes],
                fraction: f,
                seed: config.train.seed + r,
            })
        })
        .collect();
    run_cells(cells, train, test, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub experiment: ExperimentKind,
    pub d: usize,
    pub fraction: f64,
    pub count: usize,
    pub mean_train_error: f64,
    pub std_train_error: f64,
    pub mean_test_error: f64,
    pub std_test_error: f64,
    pub mean_normalized_ed: f64,
    pub std_normalized_ed: f64,
}

/// Groups by (experiment, d, fraction) in order of first appearance.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<GroupSummary> {
    let mut keys: Vec<(ExperimentKind, usize, f64)> = Vec::new();
    for r in records {
        let k = (r.experiment, r.d, r.fraction);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(experiment, d, fraction)| {
            let group: Vec<&ExperimentRecord> = records
                .iter()
                .filter(|r| r.experiment == experiment && r.d == d && r.fraction == fraction)
                .collect();
            let col = |f: fn(&ExperimentRecord) -> f64| group.iter().map(|r| f(r)).collect::<Vec<_>>();
            let train = col(|r| r.train_error);
            let test = col(|r| r.test_error);
            let ned = col(|r| r.normalized_ed);
            GroupSummary {
                experiment,
                d,
                fraction,
                count: group.len(),
                mean_train_error: mean(&train),
                std_train_error: sample_std(&train),
                mean_test_error: mean(&test),
                std_test_error: sample_std(&test),
                mean_normalized_ed: mean(&ned),
                std_normalized_ed: sample_std(&ned),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SyntheticKind, SyntheticSpec};
    use crate::fisher::DenseEstimator;

    fn quick_config(repeats: usize) -> SweepConfig {
        let train = TrainConfig { epochs: 5, batch_size: 20, learning_rate: 0.05, seed: 100, stop_at_zero_train_error: true };
        let mut c = SweepConfig::new(train, repeats);
        c.fisher = FisherSettings::dense(DenseEstimator::Empirical);
        c
    }

    #[test]
    fn size_sweep_structure() {
        let (tr, te) = SyntheticSpec::new(SyntheticKind::Moons, 1).generate(60, 40).unwrap();
        let recs = sweep_model_size(&[4], &tr, &te, &quick_config(10)).unwrap();
        assert_eq!(recs.len(), 10);
        let mut seeds: Vec<u64> = recs.iter().map(|r| r.seed).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), 10);
        assert!(recs.iter().all(|r| r.d == recs[0].d));
        assert!(recs.iter().all(|r| r.normalized_ed > 0.0 && r.normalized_ed <= 1.0));
        let s = summarize(&recs);
        assert_eq!(s.len(), 1);
        let ned: Vec<f64> = recs.iter().map(|r| r.normalized_ed).collect();
        assert!((s[0].std_normalized_ed - sample_std(&ned)).abs() < 1e-12);
    }

    #[test]
    fn randomization_sweep_counts_rows() {
        let (tr, te) = SyntheticSpec::new(SyntheticKind::Blobs, 2).generate(40, 20).unwrap();
        let recs = sweep_randomization(&[0.2, 0.4, 0.6, 0.8, 1.0], (3, 3), &tr, &te, &quick_config(2)).unwrap();
        assert_eq!(recs.len(), 10);
        assert_eq!(summarize(&recs).len(), 5);
        assert!(summarize(&recs).iter().all(|g| g.count == 2));
    }

    #[test]
    fn single_repeat_has_zero_spread() {
        let (tr, te) = SyntheticSpec::new(SyntheticKind::Blobs, 2).generate(40, 20).unwrap();
        let recs = sweep_model_size(&[3, 5], &tr, &te, &quick_config(1)).unwrap();
        assert!(recs[0].d < recs[1].d);
        assert!(summarize(&recs).iter().all(|g| g.std_test_error == 0.0));
    }

    #[test]
    fn invalid_sweep_inputs() {
        let (tr, te) = SyntheticSpec::new(SyntheticKind::Blobs, 2).generate(40, 20).unwrap();
        assert!(sweep_model_size(&[5, 3], &tr, &te, &quick_config(1)).is_err());
        assert!(sweep_model_size(&[3], &tr, &te, &quick_config(0)).is_err());
        assert!(sweep_randomization(&[0.5, 0.2], (3, 3), &tr, &te, &quick_config(1)).is_err());
        assert!(sweep_randomization(&[1.2], (3, 3), &tr, &te, &quick_config(1)).is_err());
    }
}
