//! Labelled classification datasets, synthetic generators and label randomization.

use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Observations, Target};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// Which labels were replaced, and what they were before.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Randomization {
    pub fraction: f64,
    pub seed: u64,
    pub original_labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub split: Split,
    pub randomization: Randomization,
    /// Free-form origin, e.g. `moons(seed=3)` or an IDX path.
    pub provenance: String,
}

impl LabeledDataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize, split: Split, provenance: impl Into<String>) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} inputs but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::LabelOutOfRange { label, classes: num_classes });
        }
        if let Some(first) = inputs.first() {
            if inputs.iter().any(|x| x.len() != first.len()) {
                return Err(Error::InvalidArgument("inputs have inconsistent dimensions".into()));
            }
        }
        let randomization = Randomization { fraction: 0.0, seed: 0, original_labels: labels.clone() };
        Ok(Self { inputs, labels, num_classes, split, randomization, provenance: provenance.into() })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// First `count` examples (or all of them, if fewer).
    pub fn take(&self, count: usize) -> Self {
        let count = count.min(self.len());
        Self {
            inputs: self.inputs[..count].to_vec(),
            labels: self.labels[..count].to_vec(),
            num_classes: self.num_classes,
            split: self.split,
            randomization: Randomization {
                fraction: self.randomization.fraction,
                seed: self.randomization.seed,
                original_labels: self.randomization.original_labels[..count].to_vec(),
            },
            provenance: self.provenance.clone(),
        }
    }
}

impl Observations for LabeledDataset {
    fn len(&self) -> usize {
        self.inputs.len()
    }
    fn input(&self, index: usize) -> &[f64] {
        &self.inputs[index]
    }
    fn target(&self, index: usize) -> Target {
        Target::Class(self.labels[index])
    }
}

/// Replaces the labels of a uniformly chosen ⌊fraction·m⌋ subset with uniform draws
/// over all classes. A draw may coincide with the original label.
pub fn randomize_labels(data: &LabeledDataset, fraction: f64, seed: u64) -> Result<LabeledDataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("randomization fraction {fraction} is outside [0, 1]")));
    }
    if data.split == Split::Test {
        return Err(Error::InvalidArgument("refusing to randomize labels of a test split".into()));
    }
    let original = data.randomization.original_labels.clone();
    let m = data.len();
    let count = ((fraction * m as f64).floor() as usize).min(m);
    let mut labels = original.clone();
    let mut pick = rng::stream(seed, 0);
    let mut chosen = index::sample(&mut pick, m, count).into_vec();
    chosen.sort_unstable();
    let mut draw = rng::stream(seed, 1);
    for i in chosen {
        labels[i] = draw.random_range(0..data.num_classes);
    }
    Ok(LabeledDataset {
        inputs: data.inputs.clone(),
        labels,
        num_classes: data.num_classes,
        split: data.split,
        randomization: Randomization { fraction, seed, original_labels: original },
        provenance: data.provenance.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    Moons,
    Blobs,
    Spirals,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moons" => Ok(SyntheticKind::Moons),
            "blobs" => Ok(SyntheticKind::Blobs),
            "spirals" => Ok(SyntheticKind::Spirals),
            other => Err(Error::InvalidArgument(format!("unknown synthetic dataset '{other}'"))),
        }
    }
}

impl SyntheticKind {
    pub fn name(&self) -> &'static str {
        match self {
            SyntheticKind::Moons => "moons",
            SyntheticKind::Blobs => "blobs",
            SyntheticKind::Spirals => "spirals",
        }
    }
}

/// Generator settings for the 2-D synthetic tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, seed: u64) -> Self {
        let noise = match kind {
            SyntheticKind::Moons => 0.15,
            SyntheticKind::Blobs => 1.0,
            SyntheticKind::Spirals => 0.2,
        };
        Self { kind, noise, seed }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    /// Disjoint train and test draws from the same distribution.
    pub fn generate(&self, train: usize, test: usize) -> Result<(LabeledDataset, LabeledDataset)> {
        let tr = self.draw(train, 0, Split::Train)?;
        let te = self.draw(test, 1, Split::Test)?;
        Ok((tr, te))
    }

    fn draw(&self, count: usize, stream: u64, split: Split) -> Result<LabeledDataset> {
        let mut r = rng::stream(rng::mix(self.seed, 0x5EED), stream);
        let mut inputs = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        for i in 0..count {
            let label = i % 2;
            let (x, y) = match self.kind {
                SyntheticKind::Moons => {
                    let t = r.random_range(0.0..PI);
                    if label == 0 {
                        (t.cos(), t.sin())
                    } else {
                        (1.0 - t.cos(), 0.5 - t.sin())
                    }
                }
                SyntheticKind::Blobs => {
                    let c = if label == 0 { -2.0 } else { 2.0 };
                    (c, c)
                }
                SyntheticKind::Spirals => {
                    let t = r.random_range(0.25..1.0f64).sqrt() * 3.0 * PI;
                    let sign = if label == 0 { 1.0 } else { -1.0 };
                    (sign * t * t.cos() / (3.0 * PI), sign * t * t.sin() / (3.0 * PI))
                }
            };
            let nx: f64 = r.sample(StandardNormal);
            let ny: f64 = r.sample(StandardNormal);
            let scale = match self.kind {
                SyntheticKind::Spirals => self.noise / 3.0,
                _ => self.noise,
            };
            inputs.push(vec![x + scale * nx, y + scale * ny]);
            labels.push(label);
        }
        let provenance = format!("{}(noise={}, seed={})", self.kind.name(), self.noise, self.seed);
        LabeledDataset::new(inputs, labels, 2, split, provenance)
    }
}
