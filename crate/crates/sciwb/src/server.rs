//! JSON HTTP API over an open workspace.
//!
//! Reads take a shared lock on the workspace; critique sessions live in
//! memory behind their own lock, so session steps are serialized. Every
//! failure is a 4xx/5xx response with body `{error, detail, location?}`.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::Value;

use sciwb_core::critique::CritiqueSession;

use crate::ops::{self, ErrorKind, OpError};
use crate::workspace::Workspace;

pub struct AppState {
    workspace: RwLock<Workspace>,
    sessions: Mutex<BTreeMap<String, CritiqueSession>>,
}

impl AppState {
    pub fn new(ws: Workspace) -> Self {
        AppState { workspace: RwLock::new(ws), sessions: Mutex::new(BTreeMap::new()) }
    }
}

type Shared = Arc<AppState>;

impl IntoResponse for OpError {
    fn into_response(self) -> Response {
        let status = match self.kind {
            ErrorKind::Invalid => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Conflict => StatusCode::CONFLICT,
            ErrorKind::Storage => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self)).into_response()
    }
}

fn bad_body(e: JsonRejection) -> OpError {
    OpError::new(ErrorKind::Invalid, "invalid request body", e.body_text())
}

fn bad_query(e: QueryRejection) -> OpError {
    OpError::new(ErrorKind::Invalid, "invalid query string", e.body_text())
}

type ApiResult = Result<Json<Value>, OpError>;

fn ok<T: Serialize>(value: T) -> ApiResult {
    Ok(Json(serde_json::to_value(value).expect("responses serialize to JSON")))
}

fn with_ws<T>(state: &AppState, f: impl FnOnce(&Workspace) -> T) -> T {
    let ws = state.workspace.read().unwrap_or_else(PoisonError::into_inner);
    f(&ws)
}

async fn taxonomy(State(s): State<Shared>) -> ApiResult {
    with_ws(&s, |ws| ok(ws.taxonomy()))
}

async fn phrasebank(State(s): State<Shared>, q: Result<Query<ops::PhrasebankQuery>, QueryRejection>) -> ApiResult {
    let Query(q) = q.map_err(bad_query)?;
    with_ws(&s, |ws| ok(ops::query_phrasebank(ws, &q)?))
}

async fn cases(State(s): State<Shared>) -> ApiResult {
    with_ws(&s, |ws| ok(ops::cases(ws)))
}

async fn parse(body: Result<Json<ops::ParseRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body.map_err(bad_body)?;
    ok(ops::parse(&req)?)
}

async fn fill(State(s): State<Shared>, body: Result<Json<ops::FillRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body.map_err(bad_body)?;
    with_ws(&s, |ws| ok(ops::fill_template(ws, &req)?))
}

async fn combine(State(s): State<Shared>, body: Result<Json<ops::CombineRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body.map_err(bad_body)?;
    with_ws(&s, |ws| ok(ops::combine_templates(ws, &req)?))
}

async fn critique(State(s): State<Shared>, body: Result<Json<ops::CritiqueRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body.map_err(bad_body)?;
    with_ws(&s, |ws| ok(ops::critique(ws, &req)?))
}

async fn critique_session(
    State(s): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<ops::CritiqueRequest>, JsonRejection>,
) -> ApiResult {
    let Json(req) = body.map_err(bad_body)?;
    let mut sessions = s.sessions.lock().unwrap_or_else(PoisonError::into_inner);
    let current = sessions.get(&id).cloned().unwrap_or_else(|| CritiqueSession::new(&id));
    // a failed step leaves the stored session as it was
    let (next, step) = with_ws(&s, |ws| ops::critique_cycle(ws, current, &req))?;
    sessions.insert(id, next);
    ok(step)
}

async fn quiz_answers(
    State(s): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<ops::QuizAnswers>, JsonRejection>,
) -> ApiResult {
    let Json(req) = body.map_err(bad_body)?;
    with_ws(&s, |ws| ok(ops::grade(ws, &id, &req)?))
}

async fn checks_get(State(s): State<Shared>, q: Result<Query<ops::TextRequest>, QueryRejection>) -> ApiResult {
    let Query(req) = q.map_err(bad_query)?;
    with_ws(&s, |ws| ok(ops::checks(ws, &req)?))
}

async fn checks_post(State(s): State<Shared>, body: Result<Json<ops::TextRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body.map_err(bad_body)?;
    with_ws(&s, |ws| ok(ops::checks(ws, &req)?))
}

async fn not_found() -> OpError {
    OpError::new(ErrorKind::NotFound, "not found", "no such endpoint")
}

pub fn router(ws: Workspace) -> Router {
    Router::new()
        .route("/api/taxonomy", get(taxonomy))
        .route("/api/phrasebank", get(phrasebank))
        .route("/api/cases", get(cases))
        .route("/api/templates/parse", post(parse))
        .route("/api/templates/fill", post(fill))
        .route("/api/templates/combine", post(combine))
        .route("/api/critique", post(critique))
        .route("/api/critique/session/{id}", post(critique_session))
        .route("/api/quiz/{id}/answers", post(quiz_answers))
        .route("/api/checks", get(checks_get).post(checks_post))
        .fallback(not_found)
        .with_state(Arc::new(AppState::new(ws)))
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(ws: Workspace, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("serving {} on http://{}", ws.root().display(), listener.local_addr()?);
    axum::serve(listener, router(ws))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
