use std::path::Path;

use clap::Args;
use effdim::data::{LabeledDataset, Split, SyntheticKind, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::idx::load_idx;
use crate::manifest::InputDigest;

pub const SYNTHETIC_TRAIN: usize = 200;
pub const SYNTHETIC_TEST: usize = 200;
pub const MNIST_TRAIN: usize = 6000;
pub const MNIST_TEST: usize = 2000;
pub const MNIST_CLASSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DatasetArgs {
    /// moons, blobs, spirals, or a directory holding the four MNIST IDX files.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Training subset size (synthetic default 200, MNIST default 6000).
    #[arg(long)]
    pub train_size: Option<usize>,
    /// Test subset size (synthetic default 200, MNIST default 2000).
    #[arg(long)]
    pub test_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// Noise level for synthetic generators.
    #[arg(long)]
    pub noise: Option<f64>,
}

pub struct LoadedData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub digests: Vec<InputDigest>,
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

impl DatasetArgs {
    pub fn is_set(&self) -> bool {
        self.dataset.is_some()
    }

    pub fn load(&self) -> CliResult<LoadedData> {
        let name = self.dataset.as_deref().ok_or_else(|| CliError::Usage("--dataset is required".into()))?;
        if let Ok(kind) = name.parse::<SyntheticKind>() {
            let mut spec = SyntheticSpec::new(kind, self.data_seed);
            if let Some(noise) = self.noise {
                if !(noise >= 0.0 && noise.is_finite()) {
                    return Err(CliError::Usage(format!("--noise must be nonnegative, got {noise}")));
                }
                spec = spec.with_noise(noise);
            }
            let (train, test) =
                spec.generate(self.train_size.unwrap_or(SYNTHETIC_TRAIN), self.test_size.unwrap_or(SYNTHETIC_TEST))?;
            return Ok(LoadedData { train, test, digests: Vec::new() });
        }
        let dir = Path::new(name);
        if !dir.is_dir() {
            return Err(CliError::Usage(format!(
                "--dataset {name:?} is neither moons, blobs, spirals nor an MNIST directory"
            )));
        }
        let mut digests = Vec::new();
        let mut split = |prefix: &str, split: Split, count: usize| -> CliResult<LabeledDataset> {
            let img_path = dir.join(format!("{prefix}-images-idx3-ubyte"));
            let lbl_path = dir.join(format!("{prefix}-labels-idx1-ubyte"));
            let img = read(&img_path)?;
            let lbl = read(&lbl_path)?;
            digests.push(InputDigest::of(&img_path, &img));
            digests.push(InputDigest::of(&lbl_path, &lbl));
            let ds = load_idx(&img, &lbl, MNIST_CLASSES, split, &img_path.display().to_string())
                .map_err(|e| CliError::Idx { path: img_path.display().to_string(), source: e })?;
            Ok(ds.take(count))
        };
        let train = split("train", Split::Train, self.train_size.unwrap_or(MNIST_TRAIN))?;
        let test = split("t10k", Split::Test, self.test_size.unwrap_or(MNIST_TEST))?;
        Ok(LoadedData { train, test, digests })
    }
}
