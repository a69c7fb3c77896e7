//! Command-line driver: dataset ingestion, checkpoints, and CSV/JSON reports.

pub mod checkpoint;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod idx;
pub mod manifest;
pub mod output;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};

/// Reads `EFFDIM_THREADS` and sizes the global worker pool.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("EFFDIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("EFFDIM_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
