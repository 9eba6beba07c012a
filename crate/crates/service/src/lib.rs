//! Stateless JSON API over the model, metrics and delegation engine.
//!
//! Every request carries the whole model. `model` is either DSL text (a JSON
//! string) or a structured document (a JSON object). `scope` is a scope name
//! (default `"all"`) or a list of actor ids.
//!
//! | route            | body                                  | response          |
//! |------------------|---------------------------------------|-------------------|
//! | `/v1/validate`   | DSL text, or a JSON model             | model, violations |
//! | `/v1/analyze`    | `{model, scope}`                      | metrics analysis  |
//! | `/v1/whatif`     | `{model, scope, moves, policy}`       | plan              |
//! | `/v1/recommend`  | `{model, scope, config}`              | plan              |

use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use charter_deps_core::delegation::{evaluate_plan, recommend, DelegationMove, PlanError, Policy, RecommendConfig};
use charter_deps_core::export::{to_document, Analysis};
use charter_deps_core::metrics::{MetricsError, Scope};
use charter_deps_core::model::{validate_model, Violation};
use charter_deps_core::structured::{self, ModelDocument};
use charter_deps_core::{dsl, ActorId, ParseError, SdModel};

pub const DEFAULT_BODY_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub body_limit: usize,
    /// Origins allowed by CORS; `*` allows any. Empty disables CORS.
    pub cors_origins: Vec<String>,
    /// Directory served for non-API paths.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { body_limit: DEFAULT_BODY_LIMIT, cors_origins: Vec::new(), static_dir: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ApiErrorCode {
    BadRequest,
    ParseError,
    DomainError,
}

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ApiErrorCode,
    pub message: String,
    #[serde(default)]
    pub details: Value,
    #[serde(skip)]
    status: Option<u16>,
}

impl ApiError {
    fn new(status: StatusCode, code: ApiErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), details: Value::Null, status: Some(status.as_u16()) }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, ApiErrorCode::BadRequest, message)
    }

    fn parse(errors: Vec<ParseError>) -> Self {
        let message = match errors.as_slice() {
            [one] => one.to_string(),
            many => format!("{} errors; first: {}", many.len(), many[0]),
        };
        let mut e = Self::new(StatusCode::UNPROCESSABLE_ENTITY, ApiErrorCode::ParseError, message);
        e.details = serde_json::to_value(errors).expect("errors serialize");
        e
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status.and_then(|s| StatusCode::from_u16(s).ok()).unwrap_or(StatusCode::BAD_REQUEST);
        json_response(status, &self)
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    (status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], to_document(value)).into_response()
}

fn body_bytes(body: Result<Bytes, BytesRejection>) -> Result<Bytes, ApiError> {
    body.map_err(|rejection| {
        let status = rejection.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "request body too large" } else { "unreadable body" };
        ApiError::new(status, ApiErrorCode::BadRequest, format!("{code}: {}", rejection.body_text()))
    })
}

fn envelope<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))
}

/// Builds and validates the model carried in a request.
fn load_model(value: Value) -> Result<SdModel, ApiError> {
    match value {
        Value::String(text) => dsl::parse_model(&text).map_err(ApiError::parse),
        Value::Object(_) => {
            let doc = structured::document_from_value(value).map_err(|e| ApiError::parse(vec![e]))?;
            structured::check(doc.into_model().map_err(ApiError::parse)?).map_err(ApiError::parse)
        }
        _ => Err(ApiError::bad_request("`model` must be DSL text or a structured model object")),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ScopeSpec {
    Named(String),
    Actors(Vec<ActorId>),
}

impl Default for ScopeSpec {
    fn default() -> Self {
        Self::Named("all".into())
    }
}

impl ScopeSpec {
    fn resolve(&self, model: &SdModel) -> Result<Scope, ApiError> {
        match self {
            ScopeSpec::Named(name) => Scope::named(model, name),
            ScopeSpec::Actors(ids) => Scope::new(model, ids.iter().cloned()),
        }
        .map_err(|e| ApiError::bad_request(e.to_string()))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeRequest {
    model: Value,
    #[serde(default)]
    scope: ScopeSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfRequest {
    model: Value,
    #[serde(default)]
    scope: ScopeSpec,
    #[serde(default)]
    moves: Vec<DelegationMove>,
    #[serde(default)]
    policy: Policy,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecommendRequest {
    model: Value,
    #[serde(default)]
    scope: ScopeSpec,
    #[serde(default)]
    config: RecommendConfig,
}

/// Response of `/v1/validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub model: ModelDocument,
    pub violations: Vec<Violation>,
}

fn is_json(headers: &HeaderMap) -> bool {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(';').next().is_some_and(|t| t.trim().eq_ignore_ascii_case("application/json")))
}

async fn validate(headers: HeaderMap, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let bytes = body_bytes(body)?;
    let model = if is_json(&headers) && !bytes.iter().all(u8::is_ascii_whitespace) {
        let value: Value = envelope(&bytes)?;
        match value {
            Value::Object(_) => {
                let doc = structured::document_from_value(value).map_err(|e| ApiError::parse(vec![e]))?;
                doc.into_model().map_err(ApiError::parse)?
            }
            Value::String(text) => dsl::parse_unvalidated(&text).map_err(ApiError::parse)?,
            _ => return Err(ApiError::bad_request("expected DSL text or a structured model object")),
        }
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| match dsl::parse_bytes(&bytes) {
            Err(errors) => ApiError::parse(errors),
            Ok(_) => ApiError::bad_request("body is not UTF-8"),
        })?;
        dsl::parse_unvalidated(text).map_err(ApiError::parse)?
    };
    let violations = validate_model(&model);
    Ok(json_response(StatusCode::OK, &Validation { model: ModelDocument::from(&model), violations }))
}

/// The analysis document for a model and scope; the CLI prints the same
/// bytes for `metrics --format structured`.
pub fn analysis_document(model: &SdModel, scope: &Scope) -> Result<String, MetricsError> {
    Ok(to_document(&Analysis::compute(model, scope)?))
}

async fn analyze(body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let req: AnalyzeRequest = envelope(&body_bytes(body)?)?;
    let model = load_model(req.model)?;
    let scope = req.scope.resolve(&model)?;
    let text = analysis_document(&model, &scope).map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok((StatusCode::OK, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], text).into_response())
}

async fn whatif(body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let req: WhatIfRequest = envelope(&body_bytes(body)?)?;
    let model = load_model(req.model)?;
    let scope = req.scope.resolve(&model)?;
    match evaluate_plan(&model, &scope, &req.moves, &req.policy) {
        Ok(plan) => Ok(json_response(StatusCode::OK, &plan)),
        Err(PlanError::Move { index, source }) => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            ApiErrorCode::DomainError,
            format!("move {index}: {source}"),
        )
        .with_details(serde_json::json!({ "index": index }))),
        Err(PlanError::Metrics(e)) => Err(ApiError::bad_request(e.to_string())),
    }
}

async fn recommend_plan(body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let req: RecommendRequest = envelope(&body_bytes(body)?)?;
    let model = load_model(req.model)?;
    let scope = req.scope.resolve(&model)?;
    let plan = recommend(&model, &scope, &req.config)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ApiErrorCode::DomainError, e.to_string()))?;
    Ok(json_response(StatusCode::OK, &plan))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, ApiErrorCode::BadRequest, "no such endpoint")
}

pub fn router(config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/v1/validate", post(validate))
        .route("/v1/analyze", post(analyze))
        .route("/v1/whatif", post(whatif))
        .route("/v1/recommend", post(recommend_plan))
        .layer(DefaultBodyLimit::max(config.body_limit));
    let mut app = match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    };
    if !config.cors_origins.is_empty() {
        let origins = if config.cors_origins.iter().any(|o| o == "*") {
            AllowOrigin::any()
        } else {
            AllowOrigin::list(config.cors_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origins)
                .allow_methods([axum::http::Method::POST, axum::http::Method::GET])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    app
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(&config)).await
}
