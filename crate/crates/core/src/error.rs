//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible or invalid dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A matrix required to be invertible is numerically singular.
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    /// Input expected to be Hermitian deviates beyond tolerance.
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// A configuration value violates a documented constraint.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The requested operation is not defined for these inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An iterative routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A persisted dataset file is corrupt or has the wrong format.
    #[error("malformed dataset: {0}")]
    Dataset(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
