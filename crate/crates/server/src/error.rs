use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use socratic_core::provider::ProviderError;
use socratic_core::Error;
use thiserror::Error;

/// Machine-readable error codes. Every code has exactly one HTTP status;
/// see [`ErrorCode::status`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    WrongPhase,
    GateLocked,
    ValidationFailed,
    Conflict,
    NotFound,
    ProviderUnavailable,
    RateLimited,
    Configuration,
    Unauthorized,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::WrongPhase | ErrorCode::GateLocked | ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::ValidationFailed => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::ProviderUnavailable | ErrorCode::Configuration => {
                StatusCode::SERVICE_UNAVAILABLE
            }
            ErrorCode::RateLimited => StatusCode::TOO_MANY_REQUESTS,
            ErrorCode::Unauthorized => StatusCode::UNAUTHORIZED,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Whether the same request may succeed if sent again unchanged.
    pub fn retryable(self) -> bool {
        matches!(self, ErrorCode::ProviderUnavailable | ErrorCode::RateLimited)
    }
}

/// JSON error body: `{"code": "...", "message": "...", "retryable": bool}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    pub retryable: bool,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            retryable: code.retryable(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::WrongPhase { .. } => ErrorCode::WrongPhase,
            Error::GateLocked { .. } => ErrorCode::GateLocked,
            Error::Validation(_)
            | Error::Schema(_)
            | Error::Mapping { .. }
            | Error::Pairing { .. } => ErrorCode::ValidationFailed,
            Error::Conflict(_) => ErrorCode::Conflict,
            Error::NotFound(_) => ErrorCode::NotFound,
            Error::Configuration(_) | Error::Template(_) => ErrorCode::Configuration,
            Error::Dialogue(p) => match p {
                ProviderError::RateLimited => ErrorCode::RateLimited,
                ProviderError::Timeout { .. } | ProviderError::MalformedResponse(_) => {
                    ErrorCode::ProviderUnavailable
                }
                ProviderError::AuthFailure(_) | ProviderError::InvalidRequest(_) => {
                    ErrorCode::Internal
                }
            },
            Error::Contract(_)
            | Error::Integrity(_)
            | Error::Stats(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorCode::Internal,
        };
        if code == ErrorCode::Internal {
            tracing::error!(error = %e, "internal error");
        }
        ApiError::new(code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(ErrorCode::ValidationFailed, r.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(r: PathRejection) -> Self {
        ApiError::new(ErrorCode::NotFound, r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::new(ErrorCode::ValidationFailed, r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}
