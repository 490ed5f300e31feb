use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("empty block at level {0}")]
    EmptyBlock(usize),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("non-elliptic configuration: {0}")]
    NonElliptic(String),
    #[error("numerical failure: {message} (last residuals {history:?})")]
    Numerical { message: String, history: Vec<f64> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
