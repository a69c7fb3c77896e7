//! ε-ball geometry and uniform sampling inside the ball.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::ParamPoint;
use crate::rng;

/// Volume of a d-dimensional Euclidean ball, held as its natural log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallVolume {
    pub dim: usize,
    pub log_volume: f64,
}

impl BallVolume {
    /// Exponentiated volume; overflows to +inf (or underflows to 0) for large d.
    pub fn value(&self) -> f64 {
        self.log_volume.exp()
    }
}

/// π^{d/2} ε^d / Γ(d/2 + 1), computed in log space.
pub fn ball_volume(dim: usize, epsilon: f64) -> Result<BallVolume> {
    if dim == 0 {
        return Err(Error::InvalidArgument("ball dimension must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {epsilon}")));
    }
    let d = dim as f64;
    let log_volume = 0.5 * d * PI.ln() + d * epsilon.ln() - ln_gamma(0.5 * d + 1.0);
    Ok(BallVolume { dim, log_volume })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallSpec {
    pub center: ParamPoint,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: ParamPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn volume(&self) -> Result<BallVolume> {
        ball_volume(self.center.dim(), self.radius)
    }
}

/// Offset of sample `index`: isotropic direction scaled by ε·U^{1/d}.
fn ball_offset(dim: usize, radius: f64, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, index);
    let mut dir: Vec<f64> = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if v.iter().any(|x| *x != 0.0) {
            break v;
        }
    };
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / dim as f64);
    for x in dir.iter_mut() {
        *x *= r / norm;
    }
    // rounding can push the norm a hair past r
    let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > radius {
        let shrink = radius / len;
        dir.iter_mut().for_each(|x| *x *= shrink);
    }
    dir
}

/// `count` points uniform in the ball. Point `i` depends only on `(spec, seed, i)`.
pub fn sample_ball(spec: &BallSpec, count: usize, seed: u64) -> Result<Vec<ParamPoint>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let dim = spec.center.dim();
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let offset = ball_offset(dim, spec.radius, seed, i);
            let values = spec
                .center
                .values()
                .iter()
                .zip(offset)
                .map(|(c, o)| c + o)
                .collect();
            spec.center.with_values(values)
        })
        .collect()
}
