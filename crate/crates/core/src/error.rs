use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("coherence is undefined for the zero matrix")]
    ZeroMatrix,

    #[error("dictionary mismatch: {0}")]
    DictionaryMismatch(String),

    #[error("invalid cluster count: rank {rank} is smaller than cluster count {clusters}")]
    InvalidClusterCount { rank: usize, clusters: usize },

    #[error("degenerate dictionary: every column is zero")]
    DegenerateDictionary,

    #[error("Neumann series diverges: operator norm {0} is not below 1")]
    DivergentSeries(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
