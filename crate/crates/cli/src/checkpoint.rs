use std::path::Path;

use effdim::params::{Architecture, ParamPoint};
use effdim::train::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetArgs;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub config: TrainConfig,
    pub dataset: DatasetArgs,
    pub train_size: usize,
    pub epochs_run: usize,
    pub final_loss: f64,
    pub final_train_error: f64,
    pub test_error: f64,
}

/// Parameters are flattened layer by layer, weights row-major then biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub arch: Architecture,
    pub params: Vec<f64>,
    pub seed: u64,
    pub training: TrainingMeta,
    pub manifest: String,
}

impl Checkpoint {
    pub fn read(path: &Path) -> CliResult<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let ck: Checkpoint = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Json { path: path.display().to_string(), source: e })?;
        Ok((ck, bytes))
    }

    pub fn point(&self) -> CliResult<ParamPoint> {
        Ok(ParamPoint::new(self.params.clone(), self.arch.clone())?)
    }
}
