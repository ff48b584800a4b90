//! Monte Carlo harness for the beamforming toolkit: experiment configs,
//! seeded sweeps over SNR grids and design methods, CSV tables, SVG charts.

pub mod output;
pub mod run;
pub mod spec;

use thiserror::Error as ThisError;

/// Harness-level failure.
#[derive(Debug, ThisError)]
pub enum Error {
    /// Bad experiment configuration, with the offending field named.
    #[error("config: {0}")]
    Config(String),
    /// Failure bubbled up from the design library.
    #[error(transparent)]
    Core(#[from] hybeam_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// Too many trials failed for the averages to be trustworthy.
    #[error("aborted: {0}")]
    Aborted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
