//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by ingestion, the spatial statistics and spot extraction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("schema error: {0}")]
    SchemaError(String),

    #[error("point id {id} out of range (n = {n})")]
    IdOutOfRange { id: usize, n: usize },

    #[error("insufficient points: got {got}, need at least {need}")]
    InsufficientPoints { got: usize, need: usize },

    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("invalid distance band {0} (must be finite and > 0)")]
    InvalidBand(f64),

    #[error("invalid radius {0} (must be finite and >= 0)")]
    InvalidRadius(f64),

    #[error("degenerate values: {0}")]
    DegenerateValues(String),

    #[error("no point has a neighbor within the band")]
    NoNeighbors,

    #[error("p-value {0} outside [0, 1]")]
    InvalidPValue(f64),

    #[error("input mismatch: {0}")]
    InputMismatch(String),

    #[error("invalid report: {0}")]
    InvalidReport(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate marginals: all ratings fall in a single category")]
    DegenerateMarginals,

    #[error("invalid rating table: {0}")]
    InvalidRatingTable(String),

    #[error("unknown event category '{0}'")]
    UnknownEvent(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
