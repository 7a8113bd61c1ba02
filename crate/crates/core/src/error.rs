use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Working precision too small. When a meaningful estimate of the
    /// required precision exists it is reported in `required_bits`.
    #[error("insufficient precision: {msg}{}", match required_bits { Some(b) => format!(" (need >= {b} bits)"), None => String::new() })]
    Precision {
        msg: String,
        required_bits: Option<usize>,
    },

    #[error("valuation undecidable: element indistinguishable from 0 at stored precision")]
    UndecidableValuation,

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("no embedding: {0}")]
    NoEmbedding(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn precision(msg: impl Into<String>) -> Self {
        Error::Precision {
            msg: msg.into(),
            required_bits: None,
        }
    }

    pub fn precision_hint(msg: impl Into<String>, required_bits: usize) -> Self {
        Error::Precision {
            msg: msg.into(),
            required_bits: Some(required_bits),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
