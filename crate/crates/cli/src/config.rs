//! Operator configuration file (TOML). Every field has a default, so an
//! empty file is valid.
//!
//! ```toml
//! bind = "127.0.0.1"
//! port = 8080
//! store = "study.log"
//! admin_token_env = "SOCRATIC_ADMIN_TOKEN"
//!
//! [provider]
//! kind = "remote"
//! endpoint = "https://api.example.com/v1/chat/completions"
//! model = "some-model"
//! api_key_env = "SOCRATIC_API_KEY"
//!
//! [rate_limit]
//! per_second = 2.0
//! burst = 4
//! ```

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use socratic_core::dialogue::TurnConfig;
use socratic_core::provider::{
    ChatProvider, RateLimited, RemoteConfig, RemoteProvider, ScriptedBehavior, ScriptedProvider,
    TokenBucket,
};
use socratic_server::ADMIN_TOKEN_ENV;

use crate::error::{read_to_string, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_bind")]
    pub bind: IpAddr,
    #[serde(default = "default_port")]
    pub port: u16,
    /// Event log; in-memory when absent.
    #[serde(default)]
    pub store: Option<PathBuf>,
    /// Environment variable holding the admin bearer token.
    #[serde(default = "default_admin_env")]
    pub admin_token_env: String,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default)]
    pub turn: Option<TurnConfig>,
    #[serde(default)]
    pub rate_limit: Option<RateLimit>,
}

fn default_bind() -> IpAddr {
    IpAddr::V4(Ipv4Addr::LOCALHOST)
}
fn default_port() -> u16 {
    8080
}
fn default_admin_env() -> String {
    ADMIN_TOKEN_ENV.into()
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: default_bind(),
            port: default_port(),
            store: None,
            admin_token_env: default_admin_env(),
            provider: ProviderConfig::default(),
            turn: None,
            rate_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderConfig {
    /// Offline provider. Without a script the built-in Socratic script is
    /// used.
    Scripted {
        #[serde(default)]
        script: Option<ScriptedBehavior>,
        #[serde(default)]
        seed: u64,
    },
    Remote(RemoteConfig),
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Scripted {
            script: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateLimit {
    pub per_second: f64,
    pub burst: u32,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }

    pub fn admin_token(&self) -> Option<String> {
        std::env::var(&self.admin_token_env).ok()
    }

    /// The configured provider; `seed` replaces the scripted seed when
    /// given.
    pub fn build_provider(&self, seed: Option<u64>) -> Result<Arc<dyn ChatProvider>> {
        let invalid = |e: socratic_core::provider::ProviderError| {
            CliError::Validation(format!("provider configuration: {e}"))
        };
        match &self.provider {
            ProviderConfig::Scripted { script, seed: s } => {
                let seed = seed.unwrap_or(*s);
                let behavior = match script {
                    Some(b) => ScriptedBehavior {
                        seed,
                        ..b.clone()
                    },
                    None => ScriptedBehavior::socratic_default(seed),
                };
                let provider = ScriptedProvider::new(behavior).map_err(invalid)?;
                Ok(self.limited(provider))
            }
            ProviderConfig::Remote(remote) => {
                Ok(self.limited(RemoteProvider::from_env(remote.clone())))
            }
        }
    }

    fn limited<P: ChatProvider + 'static>(&self, provider: P) -> Arc<dyn ChatProvider> {
        match self.rate_limit {
            Some(r) => Arc::new(RateLimited::new(provider, TokenBucket::new(r.per_second, r.burst))),
            None => Arc::new(provider),
        }
    }
}
