//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by data ingestion, validation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV parse failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// The input data violates a structural constraint (non-binary value,
    /// ragged matrix, self-loop, unknown label, ...).
    #[error("invalid data: {0}")]
    Data(String),

    /// An argument combination is invalid (bad dimensions, bad bounds, ...).
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
