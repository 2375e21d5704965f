use std::time::Duration;

use async_trait::async_trait;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tracing::warn;

use super::{ChatProvider, ChatRequest, ProviderError};
use crate::domain::Role;

/// Request/response layout of the chat-completion endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireFormat {
    /// `messages` with a leading system message; reply in
    /// `choices[0].message.content`.
    #[default]
    OpenAiChat,
    /// Top-level `system`; reply in `content[*].text`.
    AnthropicMessages,
}

impl WireFormat {
    fn role(role: Role) -> &'static str {
        match role {
            Role::Socratic => "assistant",
            Role::Annotator => "user",
        }
    }

    pub fn body(self, model: &str, request: &ChatRequest) -> Value {
        let history = request.history.iter().map(|h| {
            json!({ "role": Self::role(h.role), "content": h.text })
        });
        match self {
            WireFormat::OpenAiChat => {
                let mut messages = vec![json!({ "role": "system", "content": request.system_prompt })];
                messages.extend(history);
                json!({
                    "model": model,
                    "messages": messages,
                    "temperature": request.temperature,
                    "max_tokens": request.max_reply_tokens,
                })
            }
            WireFormat::AnthropicMessages => json!({
                "model": model,
                "system": request.system_prompt,
                "messages": history.collect::<Vec<_>>(),
                "temperature": request.temperature,
                "max_tokens": request.max_reply_tokens,
            }),
        }
    }

    pub fn parse(self, body: &Value) -> Result<String, ProviderError> {
        let text = match self {
            WireFormat::OpenAiChat => body
                .pointer("/choices/0/message/content")
                .and_then(Value::as_str)
                .map(str::to_string),
            WireFormat::AnthropicMessages => body.get("content").and_then(Value::as_array).map(|blocks| {
                blocks
                    .iter()
                    .filter_map(|b| b.get("text").and_then(Value::as_str))
                    .collect::<String>()
            }),
        };
        match text {
            Some(t) if !t.trim().is_empty() => Ok(t.trim().to_string()),
            _ => Err(ProviderError::MalformedResponse(
                "no reply text in response body".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub wire_format: WireFormat,
    /// Environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    /// Prepended to the key in the auth header.
    #[serde(default = "default_auth_prefix")]
    pub auth_prefix: String,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
}

fn default_key_env() -> String {
    "SOCRATIC_API_KEY".into()
}
fn default_auth_header() -> String {
    "Authorization".into()
}
fn default_auth_prefix() -> String {
    "Bearer ".into()
}
fn default_attempts() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            wire_format: WireFormat::default(),
            api_key_env: default_key_env(),
            auth_header: default_auth_header(),
            auth_prefix: default_auth_prefix(),
            max_attempts: default_attempts(),
            initial_backoff_ms: default_backoff_ms(),
        }
    }
}

/// HTTP chat-completion backend with bounded exponential backoff.
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    config: RemoteConfig,
    api_key: Option<String>,
    client: reqwest::Client,
}

enum Attempt {
    Done(Result<String, ProviderError>),
    Transient(ProviderError),
}

impl RemoteProvider {
    /// Reads the API key from the configured environment variable. A
    /// missing key is allowed for unauthenticated local endpoints.
    pub fn from_env(config: RemoteConfig) -> Self {
        let api_key = std::env::var(&config.api_key_env).ok();
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: RemoteConfig, api_key: Option<String>) -> Self {
        Self {
            config,
            api_key,
            client: reqwest::Client::new(),
        }
    }

    async fn attempt(&self, request: &ChatRequest, body: &Value) -> Attempt {
        let mut builder = self
            .client
            .post(&self.config.endpoint)
            .timeout(request.timeout)
            .json(body);
        if let Some(key) = &self.api_key {
            builder = builder.header(
                self.config.auth_header.as_str(),
                format!("{}{key}", self.config.auth_prefix),
            );
        }
        let response = match builder.send().await {
            Ok(r) => r,
            Err(e) => {
                warn!(error = %e, "chat request failed");
                return Attempt::Transient(ProviderError::Timeout { attempts: 0 });
            }
        };
        let status = response.status();
        match status {
            StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => {
                return Attempt::Done(Err(ProviderError::AuthFailure(status.to_string())))
            }
            StatusCode::TOO_MANY_REQUESTS => return Attempt::Transient(ProviderError::RateLimited),
            s if s.is_server_error() || s == StatusCode::REQUEST_TIMEOUT => {
                return Attempt::Transient(ProviderError::Timeout { attempts: 0 })
            }
            s if s.is_client_error() => {
                let detail = response.text().await.unwrap_or_default();
                return Attempt::Done(Err(ProviderError::InvalidRequest(format!("{s}: {detail}"))));
            }
            _ => {}
        }
        match response.json::<Value>().await {
            Ok(v) => Attempt::Done(self.config.wire_format.parse(&v)),
            Err(e) if e.is_timeout() => Attempt::Transient(ProviderError::Timeout { attempts: 0 }),
            Err(e) => Attempt::Done(Err(ProviderError::MalformedResponse(e.to_string()))),
        }
    }
}

#[async_trait]
impl ChatProvider for RemoteProvider {
    async fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        request.validate()?;
        let body = self.config.wire_format.body(&self.config.model, request);
        let attempts = self.config.max_attempts.max(1);
        let mut backoff = Duration::from_millis(self.config.initial_backoff_ms);
        let mut last = ProviderError::Timeout { attempts };
        for attempt in 1..=attempts {
            match self.attempt(request, &body).await {
                Attempt::Done(result) => return result,
                Attempt::Transient(e) => last = e,
            }
            if attempt < attempts {
                tokio::time::sleep(backoff).await;
                backoff *= 2;
            }
        }
        Err(match last {
            ProviderError::Timeout { .. } => ProviderError::Timeout { attempts },
            other => other,
        })
    }
}
