//! Crate-wide error type.

use thiserror::Error;

/// Errors produced across the crate.
///
/// Exit-code mapping for the command-line tool lives in [`crate::cli`]:
/// data/usage problems map to 2, estimation failures to 1.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or configuration parameter is outside its domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Both couplings are zero, so no dynamics are generated.
    #[error("degenerate model: both couplings are zero")]
    DegenerateModel,

    /// Level index outside 1..=3.
    #[error("level index {0} out of range (levels are 1, 2, 3)")]
    IndexOutOfRange(usize),

    /// A time grid violated its invariants.
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// A data vector violated its invariants.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// The likelihood needs more samples than basis functions.
    #[error("insufficient data: {0} samples, need more than 3")]
    InsufficientData(usize),

    /// All-zero data leaves the likelihood undefined.
    #[error("likelihood undefined for all-zero data")]
    UndefinedLikelihood,

    /// The frequency search found nothing to report.
    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    /// An N-level system description is inconsistent.
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    /// A block partition does not match the Hamiltonian it is applied to.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// A text input could not be parsed. Line numbers are 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
