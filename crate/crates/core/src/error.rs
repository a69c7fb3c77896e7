use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("n = {n} is too small; at least 19 samples are needed so that 2π·log n < n")]
    SampleCountTooSmall { n: u64 },

    #[error("gamma = {gamma} is outside the admissible interval ({lower}, 1]")]
    GammaOutOfRange { gamma: f64, lower: f64 },

    #[error("epsilon = {epsilon} is below 1/√n = {min}")]
    EpsilonTooSmall { epsilon: f64, min: f64 },

    #[error("epsilon = {epsilon} is outside ({lower}, 1]")]
    EpsilonOutOfRange { epsilon: f64, lower: f64 },

    #[error("parameter dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("label {label} is out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("target kind does not match the model: {0}")]
    TargetMismatch(&'static str),

    #[error("operation requires an MLP model")]
    NotMlp,

    #[error("negative eigenvalue {value} passed where a nonnegative spectrum is required")]
    NegativeEigenvalue { value: f64 },

    #[error("symmetric eigensolver did not converge on a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("mean Fisher trace is zero; every score vanishes on the region")]
    ZeroTrace,

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence { .. } | Error::ZeroTrace | Error::Divergence { .. }
        )
    }
}
