//! Effective dimension of parameterized statistical models.
//!
//! The crate estimates Fisher information (dense or Kronecker-factored),
//! turns normalized spectra into global and local effective dimensions,
//! evaluates the associated generalization and continuity bounds, and runs
//! small training sweeps that relate those quantities to test error.

pub mod ball;
pub mod bounds;
pub mod config;
pub mod data;
pub mod effdim;
pub mod error;
pub mod fisher;
pub mod models;
pub mod params;
pub mod rng;
pub mod train;

pub use ball::{ball_volume, sample_ball, BallSpec, BallVolume};
pub use config::{kappa, EdConfig, IntegrationMode};
pub use effdim::{effective_dimension, local_effective_dimension, z_value, EdResult, FisherMethod, FisherSettings};
pub use error::{Error, Result};
pub use fisher::{format_float, FisherOperator, Spectrum};
pub use params::{Architecture, ParamPoint};
