//! Calls the HTTP API in process, without a socket.

use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use socratic_server::{ApiError, ErrorCode};
use tower::ServiceExt;

use crate::error::{CliError, Result};

#[derive(Clone)]
pub struct ApiClient {
    router: Router,
    admin_token: Option<String>,
}

impl ApiClient {
    pub fn new(router: Router, admin_token: Option<String>) -> Self {
        Self {
            router,
            admin_token,
        }
    }

    pub async fn raw(
        &self,
        method: Method,
        uri: &str,
        body: Option<&impl Serialize>,
        admin: bool,
    ) -> Result<Vec<u8>> {
        let call = format!("{method} {uri}");
        let mut req = Request::builder().method(method).uri(uri);
        if admin {
            if let Some(token) = &self.admin_token {
                req = req.header(header::AUTHORIZATION, format!("Bearer {token}"));
            }
        }
        let body = match body {
            Some(b) => {
                req = req.header(header::CONTENT_TYPE, "application/json");
                Body::from(serde_json::to_vec(b).map_err(|e| CliError::Internal(e.to_string()))?)
            }
            None => Body::empty(),
        };
        let req = req.body(body).map_err(|e| CliError::Internal(e.to_string()))?;
        let resp = self
            .router
            .clone()
            .oneshot(req)
            .await
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let status = resp.status();
        let bytes = to_bytes(resp.into_body(), usize::MAX)
            .await
            .map_err(|e| CliError::Internal(e.to_string()))?
            .to_vec();
        if !status.is_success() {
            let error = serde_json::from_slice(&bytes).unwrap_or_else(|_| {
                ApiError::new(
                    ErrorCode::Internal,
                    format!("status {status}: {}", String::from_utf8_lossy(&bytes)),
                )
            });
            return Err(CliError::Api { call, error });
        }
        Ok(bytes)
    }

    pub async fn post<T: DeserializeOwned>(&self, uri: &str, body: Option<&impl Serialize>) -> Result<T> {
        let bytes = self.raw(Method::POST, uri, body, false).await?;
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Internal(format!("POST {uri}: bad response: {e}")))
    }

    pub async fn get<T: DeserializeOwned>(&self, uri: &str) -> Result<T> {
        let bytes = self.raw(Method::GET, uri, None::<&()>, false).await?;
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Internal(format!("GET {uri}: bad response: {e}")))
    }
}
