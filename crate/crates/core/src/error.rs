use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing column `{0}` in header")]
    MissingColumn(String),

    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("dataset is empty")]
    Empty,

    #[error("record {index}: nonpositive weight {weight}")]
    NonpositiveWeight { index: usize, weight: f64 },

    #[error("record {index}: {field} is not finite")]
    NonFinite { index: usize, field: &'static str },

    #[error("record {index}: {field} outside [0,1] ({value})")]
    OutsideUnitInterval {
        index: usize,
        field: &'static str,
        value: f64,
    },

    #[error("weights must be nonempty, finite and strictly positive")]
    InvalidWeights,

    #[error("degenerate null: zero variance")]
    DegenerateNull,

    #[error("subpopulation score {score} has no full-population neighbors")]
    EmptyCell { score: f64 },

    #[error("null model has {got} entries, aggregated dataset has {expected} groups")]
    NullLength { expected: usize, got: usize },

    #[error("curve length mismatch: {0}")]
    LengthMismatch(String),

    #[error("curves were not built from the same dataset: {0}")]
    CurveMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
