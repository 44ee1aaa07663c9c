use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at J = {0}")]
    Pole(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("not an endomorphism expression: {0}")]
    NotEndomorphism(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("no Bézout pair: {0}")]
    NoBezoutPair(String),
    #[error("untrusted spectral data: {0}")]
    Untrusted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
