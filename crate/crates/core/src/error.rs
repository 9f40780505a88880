use thiserror::Error;

#[derive(Debug, Error)]
pub enum QmoError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A black-box oracle failed or replied with something unusable. `payload`
    /// carries the raw reply when there was one.
    #[error("oracle error: {message}")]
    Oracle {
        message: String,
        payload: Option<String>,
    },

    #[error("non-finite loss {value} at query {query}")]
    NonFiniteLoss { query: usize, value: f64 },

    #[error("non-finite iterate after step at iteration {iteration}")]
    NonFiniteUpdate { iteration: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no valid solution")]
    NoSolution,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QmoError {
    pub fn oracle(message: impl Into<String>) -> Self {
        QmoError::Oracle {
            message: message.into(),
            payload: None,
        }
    }

    pub fn oracle_with_payload(message: impl Into<String>, payload: impl Into<String>) -> Self {
        QmoError::Oracle {
            message: message.into(),
            payload: Some(payload.into()),
        }
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self, QmoError::Oracle { .. })
    }
}

pub type Result<T> = std::result::Result<T, QmoError>;
