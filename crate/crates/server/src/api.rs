use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

use crate::service::{
    AccountView, Answer, ChallengeView, GrantView, ObjectView, RegisterRequest, Service, ServiceError,
    SessionView, UploadRequest,
};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, code: "invalid_request", message: message.into() }
    }

    fn internal() -> Self {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, code: "internal", message: "internal error".into() }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        use ServiceError::*;
        let (status, code) = match &e {
            OutOfRange(_) => (StatusCode::BAD_REQUEST, "out_of_range"),
            WeakInput(_) => (StatusCode::BAD_REQUEST, "invalid_input"),
            InvalidSelection(_) => (StatusCode::BAD_REQUEST, "invalid_selection"),
            DuplicateUsername => (StatusCode::CONFLICT, "duplicate_username"),
            BadCredentials => (StatusCode::UNAUTHORIZED, "bad_credentials"),
            Unauthenticated => (StatusCode::UNAUTHORIZED, "unauthenticated"),
            NotOwner => (StatusCode::FORBIDDEN, "not_owner"),
            NotFound => (StatusCode::NOT_FOUND, "not_found"),
            LockedOut => (StatusCode::TOO_MANY_REQUESTS, "locked_out"),
            ChallengeFailed => (StatusCode::FORBIDDEN, "challenge_failed"),
            GrantInvalid => (StatusCode::FORBIDDEN, "grant_invalid"),
            PayloadTooLarge(_) => (StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large"),
            Transport(_) => (StatusCode::BAD_GATEWAY, "delivery_failed"),
            Storage(detail) => {
                tracing::error!(%detail, "storage failure");
                (StatusCode::INTERNAL_SERVER_ERROR, "storage")
            }
        };
        ApiError { status, code, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

fn bearer(headers: &HeaderMap) -> Result<String, ApiError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_owned())
        .filter(|t| !t.is_empty())
        .ok_or_else(|| ServiceError::Unauthenticated.into())
}

/// Runs a service call on the blocking pool; password hashing and file IO live there.
async fn blocking<T, F>(service: Arc<Service>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&service)).await {
        Ok(r) => r.map(Json).map_err(ApiError::from),
        Err(_) => Err(ApiError::internal()),
    }
}

#[derive(Debug, Deserialize)]
struct LoginBody {
    username: String,
    password: String,
}

#[derive(Debug, Deserialize)]
struct UploadBody {
    name: String,
    payload_b64: String,
    confidentiality: i64,
    integrity: i64,
    availability: i64,
    #[serde(default)]
    encrypted: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DownloadBody {
    pub object: ObjectView,
    pub payload_b64: String,
}

async fn register(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<AccountView> {
    let req: RegisterRequest = parse(&body)?;
    blocking(svc, move |s| s.register(req)).await
}

async fn login(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<SessionView> {
    let req: LoginBody = parse(&body)?;
    blocking(svc, move |s| s.login(&req.username, &req.password)).await
}

async fn upload(State(svc): State<Arc<Service>>, headers: HeaderMap, body: Bytes) -> ApiResult<ObjectView> {
    let token = bearer(&headers)?;
    let req: UploadBody = parse(&body)?;
    let payload = B64.decode(req.payload_b64.as_bytes()).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let req = UploadRequest {
        name: req.name,
        payload,
        confidentiality: req.confidentiality,
        integrity: req.integrity,
        availability: req.availability,
        encrypted: req.encrypted,
    };
    blocking(svc, move |s| s.upload(&token, req)).await
}

async fn list(State(svc): State<Arc<Service>>, headers: HeaderMap) -> ApiResult<Vec<ObjectView>> {
    let token = bearer(&headers)?;
    blocking(svc, move |s| s.list(&token)).await
}

async fn access_request(
    State(svc): State<Arc<Service>>,
    headers: HeaderMap,
    Path(object_id): Path<String>,
) -> ApiResult<ChallengeView> {
    let token = bearer(&headers)?;
    blocking(svc, move |s| s.request_download(&token, &object_id)).await
}

async fn answer(
    State(svc): State<Arc<Service>>,
    headers: HeaderMap,
    Path(challenge_id): Path<String>,
    body: Bytes,
) -> ApiResult<GrantView> {
    let token = bearer(&headers)?;
    let answer: Answer = parse(&body)?;
    blocking(svc, move |s| s.complete_challenge(&token, &challenge_id, &answer)).await
}

async fn download(
    State(svc): State<Arc<Service>>,
    headers: HeaderMap,
    Path(grant_id): Path<String>,
) -> ApiResult<DownloadBody> {
    let token = bearer(&headers)?;
    let Json((object, bytes)) = blocking(svc, move |s| s.download(&token, &grant_id)).await?;
    Ok(Json(DownloadBody { object, payload_b64: B64.encode(bytes) }))
}

async fn catalog(State(svc): State<Arc<Service>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], svc.catalog().to_json()).into_response()
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(service: Arc<Service>) -> Router {
    let cfg = service.config();
    // base64 inflates by 4/3; leave headroom for the JSON envelope.
    let body_limit = cfg.max_upload_bytes / 3 * 4 + 64 * 1024;
    let assets = ServeDir::new(&cfg.assets_dir);
    Router::new()
        .route("/health", get(health))
        .route("/register", post(register))
        .route("/login", post(login))
        .route("/objects", post(upload).get(list))
        .route("/objects/{id}/access-request", post(access_request))
        .route("/challenges/{id}/answer", post(answer))
        .route("/download/{grant_id}", get(download))
        .route("/catalog", get(catalog))
        .nest_service("/assets", assets)
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(TraceLayer::new_for_http())
        .with_state(service)
}
