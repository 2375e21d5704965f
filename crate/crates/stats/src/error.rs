use thiserror::Error;

pub type Result<T> = std::result::Result<T, StatsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    /// Inputs violate a precondition (empty sample, k > n, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The statistic is undefined because the variance vanishes.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}
