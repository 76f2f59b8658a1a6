use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("domain violation in `{context}`: {message}")]
    Domain { context: String, message: String },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("trajectory diverged at step {step} (|x|_inf = {magnitude:.3e})")]
    Diverged { step: usize, magnitude: f64 },

    #[error("non-finite value at step {0}")]
    NonFinite(usize),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
