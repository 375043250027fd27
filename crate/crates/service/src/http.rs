use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use engage_core::codebook::write_annotations_csv;
use engage_core::filtering::FilteredSet;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use tower_http::services::ServeDir;

use crate::error::ServiceError;
use crate::service::{AdjudicationRequest, CodingService, CorpusUpload, ExportSet, SessionRequest, Submission};

/// Header carrying the shared access token, when one is configured.
pub const TOKEN_HEADER: &str = "x-engage-token";

#[derive(Clone)]
pub struct AppState {
    pub service: Arc<Mutex<CodingService>>,
    pub token: Option<Arc<str>>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.body())).into_response()
    }
}

/// JSON body extractor whose rejections use the service error shape.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ServiceError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e: JsonRejection| ServiceError::BadRequest(e.body_text()))
    }
}

pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut axum::http::request::Parts, state: &S) -> Result<Self, ServiceError> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| Params(q.0))
            .map_err(|e: QueryRejection| ServiceError::BadRequest(e.body_text()))
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

async fn check_token(State(app): State<AppState>, headers: HeaderMap, req: Request, next: Next) -> Response {
    if let Some(expected) = &app.token {
        let given = headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_ref()) {
            return ServiceError::Unauthorized.into_response();
        }
    }
    next.run(req).await
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn post_corpus(State(app): State<AppState>, Body(upload): Body<CorpusUpload>) -> Response {
    match app.service.lock().await.register_corpus(upload) {
        Ok(summary) => (StatusCode::CREATED, Json(summary)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_corpus(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    app.service.lock().await.corpus_summary(&id).map(Json)
}

async fn post_filtered(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Body(set): Body<FilteredSet>,
) -> Response {
    match app.service.lock().await.register_filtered(&id, set) {
        Ok(r) => (StatusCode::CREATED, Json(r)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn post_session(State(app): State<AppState>, Body(req): Body<SessionRequest>) -> Response {
    match app.service.lock().await.create_session(req) {
        Ok(s) => (StatusCode::CREATED, Json(s)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    app.service.lock().await.session_summary(&id).map(Json)
}

#[derive(Deserialize)]
struct CoderQuery {
    coder: String,
}

async fn get_next(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Params(q): Params<CoderQuery>,
) -> ApiResult<impl Serialize> {
    app.service.lock().await.next_item(&id, &q.coder).map(Json)
}

async fn post_annotation(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Body(sub): Body<Submission>,
) -> Response {
    match app.service.lock().await.submit(&id, sub) {
        Ok(ack) if ack.replayed => (StatusCode::OK, Json(ack)).into_response(),
        Ok(ack) => (StatusCode::CREATED, Json(ack)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_progress(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    app.service.lock().await.progress(&id).map(Json)
}

async fn get_agreement(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    app.service.lock().await.live_agreement(&id).map(Json)
}

#[derive(Deserialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Deserialize)]
struct ExportQuery {
    #[serde(default)]
    format: Format,
    #[serde(default)]
    set: ExportSet,
    #[serde(default)]
    coder: Option<String>,
}

async fn get_export(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Params(q): Params<ExportQuery>,
) -> Result<Response, ServiceError> {
    let export = app.service.lock().await.export(&id, q.set, q.coder.as_deref())?;
    Ok(match q.format {
        Format::Json => Json(export).into_response(),
        Format::Csv => {
            let mut out = Vec::new();
            write_annotations_csv(&export.annotations, &mut out).map_err(|e| ServiceError::Storage(e.to_string()))?;
            ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], out).into_response()
        }
    })
}

async fn post_close(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    app.service.lock().await.close(&id).map(Json)
}

async fn post_adjudicate(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> ApiResult<impl Serialize> {
    let req: AdjudicationRequest = if body.iter().all(u8::is_ascii_whitespace) {
        AdjudicationRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(e.to_string()))?
    };
    app.service.lock().await.adjudicate(&id, req).map(Json)
}

async fn get_adjudicated(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl Serialize> {
    app.service.lock().await.export(&id, ExportSet::Adjudicated, None).map(Json)
}

async fn fallback(uri: axum::http::Uri) -> ServiceError {
    ServiceError::NoRoute(uri.path().to_owned())
}

/// The full API. When `ui_dir` is given its files are served under `/ui`.
pub fn router(app: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/corpora", post(post_corpus))
        .route("/corpora/{id}", get(get_corpus))
        .route("/corpora/{id}/filtered", post(post_filtered))
        .route("/sessions", post(post_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/next", get(get_next))
        .route("/sessions/{id}/annotations", post(post_annotation))
        .route("/sessions/{id}/progress", get(get_progress))
        .route("/sessions/{id}/agreement", get(get_agreement))
        .route("/sessions/{id}/export", get(get_export))
        .route("/sessions/{id}/close", post(post_close))
        .route("/sessions/{id}/adjudicate", post(post_adjudicate))
        .route("/sessions/{id}/adjudicated", get(get_adjudicated))
        .route_layer(middleware::from_fn_with_state(app.clone(), check_token));
    let mut router = Router::new().route("/health", get(health)).merge(api);
    if let Some(dir) = ui_dir {
        router = router.nest_service("/ui", ServeDir::new(dir));
    }
    router.fallback(fallback).with_state(app)
}
