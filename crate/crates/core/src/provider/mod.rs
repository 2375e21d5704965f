//! Chat-completion backends behind one trait.

mod ratelimit;
mod remote;
mod scripted;

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Role;

pub use ratelimit::{RateLimited, TokenBucket};
pub use remote::{RemoteConfig, RemoteProvider, WireFormat};
pub use scripted::{ScriptMode, ScriptedBehavior, ScriptedProvider};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub role: Role,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_prompt: String,
    /// Starts with the Socratic opener; roles alternate.
    pub history: Vec<HistoryEntry>,
    pub max_reply_tokens: u32,
    pub temperature: f64,
    pub timeout: Duration,
}

impl ChatRequest {
    pub const DEFAULT_TEMPERATURE: f64 = 0.3;
    pub const DEFAULT_MAX_REPLY_TOKENS: u32 = 600;
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

    pub fn new(system_prompt: impl Into<String>, history: Vec<HistoryEntry>) -> Self {
        Self {
            system_prompt: system_prompt.into(),
            history,
            max_reply_tokens: Self::DEFAULT_MAX_REPLY_TOKENS,
            temperature: Self::DEFAULT_TEMPERATURE,
            timeout: Self::DEFAULT_TIMEOUT,
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.history.is_empty() {
            return Err(ProviderError::InvalidRequest("history is empty".into()));
        }
        if self.history.windows(2).any(|w| w[0].role == w[1].role) {
            return Err(ProviderError::InvalidRequest("history roles do not alternate".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ProviderError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_reply_tokens == 0 {
            return Err(ProviderError::InvalidRequest("max_reply_tokens is 0".into()));
        }
        Ok(())
    }

    /// Number of annotator messages in the history.
    pub fn turn(&self) -> usize {
        self.history
            .iter()
            .filter(|h| h.role == Role::Annotator)
            .count()
    }

    pub fn last_annotator_text(&self) -> Option<&str> {
        self.history
            .iter()
            .rev()
            .find(|h| h.role == Role::Annotator)
            .map(|h| h.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider did not answer after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("provider rejected the credentials: {0}")]
    AuthFailure(String),
    #[error("provider rate limit exceeded")]
    RateLimited,
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Timeout { .. } | ProviderError::RateLimited)
    }
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    async fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;
}

#[async_trait]
impl<P: ChatProvider + ?Sized> ChatProvider for std::sync::Arc<P> {
    async fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        (**self).complete(request).await
    }
}
