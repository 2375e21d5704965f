use std::convert::Infallible;

use axum::body::Body;
use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use socratic_core::domain::{ChatMessage, DisqualificationReason, ParticipantStatus, SurveyResponse};
use socratic_core::ids::{DatapointId, ParticipantId, SessionId};
use socratic_core::service::ChatReply;
use socratic_core::session::{InitialInput, PostInput};
use socratic_core::store::ExportFilter;
use socratic_core::view::SessionView;

use crate::{ApiError, AppState, ErrorCode};

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSessionBody {
    #[serde(alias = "participant_external_id")]
    pub participant_id: ParticipantId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationBody {
    pub datapoint_id: DatapointId,
    #[serde(flatten)]
    pub input: InitialInput,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttentionBody {
    pub index: u8,
    pub option: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttentionReply {
    pub correct: bool,
    pub disqualified: bool,
    pub view: SessionView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatBody {
    pub datapoint_id: DatapointId,
    pub text: String,
    /// Retrying with the same id replays the stored turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_message_id: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReannotationBody {
    pub datapoint_id: DatapointId,
    #[serde(flatten)]
    pub input: PostInput,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlagBody {
    pub reason: DisqualificationReason,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlagReply {
    pub status: ParticipantStatus,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session))
        .route("/v1/sessions/{id}/annotations", post(submit_annotation))
        .route("/v1/sessions/{id}/attention", post(submit_attention))
        .route("/v1/sessions/{id}/confirm", post(confirm))
        .route("/v1/sessions/{id}/break", post(acknowledge_break))
        .route("/v1/sessions/{id}/chat", post(chat))
        .route("/v1/sessions/{id}/reannotations", post(submit_reannotation))
        .route("/v1/sessions/{id}/survey", post(submit_survey))
        .route("/v1/export/study", get(export_study))
        .route("/v1/admin/sessions/{id}/transcript", get(transcript))
        .route("/v1/admin/sessions/{id}/flag", post(flag))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such endpoint") })
        .with_state(state)
}

fn session_id(path: Result<Path<String>, PathRejection>) -> ApiResult<SessionId> {
    let Path(id) = path?;
    Ok(SessionId::new(id))
}

fn body<T>(json: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    Ok(json?.0)
}

fn require_admin(state: &AppState, headers: &HeaderMap) -> ApiResult<()> {
    let Some(expected) = &state.admin_token else {
        return Err(ApiError::new(
            ErrorCode::Configuration,
            "admin endpoints are disabled (no admin token configured)",
        ));
    };
    let presented = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if presented != Some(expected.as_str()) {
        return Err(ApiError::new(ErrorCode::Unauthorized, "missing or wrong admin token"));
    }
    Ok(())
}

async fn create_session(
    State(state): State<AppState>,
    json: Result<Json<CreateSessionBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let req = body(json)?;
    let view = state.service.start_session(req.participant_id)?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<SessionView>> {
    Ok(Json(state.service.view(&session_id(path)?)?))
}

async fn submit_annotation(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
    json: Result<Json<AnnotationBody>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let id = session_id(path)?;
    let req = body(json)?;
    Ok(Json(state.service.submit_initial(&id, &req.datapoint_id, req.input).await?))
}

async fn submit_attention(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
    json: Result<Json<AttentionBody>, JsonRejection>,
) -> ApiResult<Json<AttentionReply>> {
    let id = session_id(path)?;
    let req = body(json)?;
    let (outcome, view) = state.service.submit_attention(&id, req.index, &req.option).await?;
    Ok(Json(AttentionReply {
        correct: outcome.correct,
        disqualified: outcome.disqualified,
        view,
    }))
}

async fn confirm(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<SessionView>> {
    Ok(Json(state.service.confirm(&session_id(path)?).await?))
}

async fn acknowledge_break(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<SessionView>> {
    Ok(Json(state.service.acknowledge_break(&session_id(path)?).await?))
}

async fn chat(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
    json: Result<Json<ChatBody>, JsonRejection>,
) -> ApiResult<Json<ChatReply>> {
    let id = session_id(path)?;
    let req = body(json)?;
    let reply = state
        .service
        .chat(&id, &req.datapoint_id, &req.text, req.client_message_id)
        .await?;
    Ok(Json(reply))
}

async fn submit_reannotation(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
    json: Result<Json<ReannotationBody>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let id = session_id(path)?;
    let req = body(json)?;
    Ok(Json(state.service.submit_reannotation(&id, &req.datapoint_id, req.input).await?))
}

/// The body is a survey response without `session_id`; the path supplies
/// it.
async fn submit_survey(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
    json: Result<Json<Value>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let id = session_id(path)?;
    let mut value = body(json)?;
    let Some(fields) = value.as_object_mut() else {
        return Err(ApiError::new(ErrorCode::ValidationFailed, "survey body must be an object"));
    };
    fields.insert("session_id".into(), Value::String(id.to_string()));
    let response: SurveyResponse = serde_json::from_value(value)
        .map_err(|e| ApiError::new(ErrorCode::ValidationFailed, e.to_string()))?;
    Ok(Json(state.service.submit_survey(&id, response).await?))
}

/// JSONL, one export record per line, written record by record.
async fn export_study(
    State(state): State<AppState>,
    headers: HeaderMap,
    query: Result<Query<ExportFilter>, QueryRejection>,
) -> ApiResult<Response> {
    require_admin(&state, &headers)?;
    let Query(filter) = query?;
    let records = state.service.store().export_study(&filter)?;
    let lines = records.into_iter().map(|r| {
        let mut line = serde_json::to_vec(&r).expect("export records always serialize");
        line.push(b'\n');
        Ok::<_, Infallible>(line)
    });
    let stream = futures_util::stream::iter(lines);
    Ok((
        [(header::CONTENT_TYPE, "application/x-ndjson")],
        Body::from_stream(stream),
    )
        .into_response())
}

async fn transcript(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<Vec<ChatMessage>>> {
    require_admin(&state, &headers)?;
    Ok(Json(state.service.store().transcript_dump(&session_id(path)?)?))
}

async fn flag(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: Result<Path<String>, PathRejection>,
    json: Result<Json<FlagBody>, JsonRejection>,
) -> ApiResult<Json<FlagReply>> {
    require_admin(&state, &headers)?;
    let id = session_id(path)?;
    let req = body(json)?;
    let status = state.service.flag_disqualification(&id, req.reason).await?;
    Ok(Json(FlagReply { status }))
}
