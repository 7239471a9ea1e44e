use thiserror::Error;

#[derive(Debug, Error)]
pub enum PaucError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("format error at row {row}: {msg}")]
    Format { row: usize, msg: String },
    #[error("{0}")]
    EmptyData(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PaucError>;
