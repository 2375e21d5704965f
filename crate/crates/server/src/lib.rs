//! HTTP JSON API under `/v1`.
//!
//! Participant endpoints take the session id as a capability token. Admin
//! endpoints (export, transcripts, flags) require `Authorization: Bearer
//! <token>` matching the configured admin token.

mod error;
mod routes;

use std::net::SocketAddr;
use std::sync::Arc;

use socratic_core::service::StudyService;

pub use error::{ApiError, ErrorCode};
pub use routes::{
    router, AnnotationBody, AttentionBody, AttentionReply, ChatBody, CreateSessionBody, FlagBody,
    FlagReply, ReannotationBody,
};

/// Environment variable read by [`AppState::from_env`].
pub const ADMIN_TOKEN_ENV: &str = "SOCRATIC_ADMIN_TOKEN";

#[derive(Clone)]
pub struct AppState {
    pub service: Arc<StudyService>,
    /// `None` disables the admin endpoints.
    pub admin_token: Option<String>,
}

impl AppState {
    pub fn new(service: Arc<StudyService>, admin_token: Option<String>) -> Self {
        Self {
            service,
            admin_token: admin_token.filter(|t| !t.is_empty()),
        }
    }

    pub fn from_env(service: Arc<StudyService>) -> Self {
        Self::new(service, std::env::var(ADMIN_TOKEN_ENV).ok())
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}
