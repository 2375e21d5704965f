use thiserror::Error;

use crate::provider::ProviderError;
use crate::session::SessionPhase;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The operation is not legal in the session's current phase.
    #[error("operation not allowed in phase {actual}: {detail}")]
    WrongPhase { actual: SessionPhase, detail: String },

    #[error("re-annotation requires at least two annotator messages (have {count})")]
    GateLocked { count: u32 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// Caller broke an operation's precondition (mismatched records, turn
    /// order, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Transcript is unchanged; the caller may retry.
    #[error("dialogue provider failed: {0}")]
    Dialogue(#[from] ProviderError),

    #[error("data integrity error: {0}")]
    Integrity(String),

    #[error("pairing error: unmatched datapoints {unmatched:?}")]
    Pairing { unmatched: Vec<String> },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("label mapping error at row {row}: unknown value {value:?}")]
    Mapping { row: usize, value: String },

    #[error(transparent)]
    Stats(#[from] socratic_stats::StatsError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn wrong_phase(actual: SessionPhase, detail: impl Into<String>) -> Self {
        Error::WrongPhase {
            actual,
            detail: detail.into(),
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Dialogue(e) if e.is_retryable())
    }
}
