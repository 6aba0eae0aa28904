//! In-memory HTTP session service.
//!
//! Models are immutable once uploaded and shared between sessions. Each
//! session sits behind its own mutex, so questions to one session are
//! answered one at a time while other sessions proceed in parallel. The
//! reasoning itself runs on the blocking pool.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use moralplan::dialogue::{ContrastiveQuestion, Session};
use moralplan::document::ModelDocument;
use moralplan::principles::Principle;
use moralplan::view::{ContrastiveView, SessionView};
use moralplan::{Error, Plan, PlanningModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Default)]
pub struct AppState {
    models: RwLock<HashMap<String, Arc<PlanningModel>>>,
    sessions: RwLock<HashMap<String, SessionEntry>>,
    next_id: AtomicU64,
}

#[derive(Clone)]
struct SessionEntry {
    model: String,
    session: Arc<Mutex<Session>>,
}

impl AppState {
    fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1)
    }

    fn model(&self, id: &str) -> Result<Arc<PlanningModel>, ApiError> {
        self.models
            .read()
            .expect("model store poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("model `{id}`")))
    }

    fn session(&self, id: &str) -> Result<SessionEntry, ApiError> {
        self.sessions
            .read()
            .expect("session store poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("session `{id}`")))
    }
}

#[derive(Debug)]
pub enum ApiError {
    Engine(Error),
    NotFound(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Engine(e)
    }
}

/// HTTP status for an engine error. A contrast case no plan can satisfy
/// gets its own status so clients can show it inline.
pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::ContrastCaseInfeasible => StatusCode::UNPROCESSABLE_ENTITY,
        Error::ResourceLimit { .. } => StatusCode::PAYLOAD_TOO_LARGE,
        Error::InvariantViolation(_) | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match &self {
            ApiError::Engine(e) => (status_for(e), e.code(), e.to_string()),
            ApiError::NotFound(what) => (StatusCode::NOT_FOUND, "not_found", format!("unknown {what}")),
        };
        (status, Json(json!({ "error": code, "message": message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &str) -> ApiResult<T> {
    Ok(serde_json::from_str(body).map_err(Error::from)?)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Engine(Error::InvariantViolation(format!("worker panicked: {e}"))))?
}

#[derive(Serialize)]
struct ModelCreated {
    id: String,
    name: Option<String>,
    variables: Vec<String>,
    actions: Vec<String>,
}

async fn create_model(State(state): State<Arc<AppState>>, body: String) -> ApiResult<impl IntoResponse> {
    let doc: ModelDocument = parse_body(&body)?;
    let model = doc.to_model()?;
    let id = state.fresh_id("m");
    let created = ModelCreated {
        id: id.clone(),
        name: model.name().map(str::to_string),
        variables: model.variables().to_vec(),
        actions: model.actions().iter().map(|a| a.label.clone()).collect(),
    };
    state
        .models
        .write()
        .expect("model store poisoned")
        .insert(id, Arc::new(model));
    Ok((StatusCode::CREATED, Json(created)))
}

async fn get_model(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ModelDocument>> {
    let model = state.model(&id)?;
    Ok(Json(ModelDocument::from_model(&model)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    model: String,
    #[serde(default)]
    principle: Option<Principle>,
    #[serde(default)]
    plan: Option<Plan>,
}

#[derive(Serialize)]
struct SessionResponse {
    id: String,
    model: String,
    #[serde(flatten)]
    view: SessionView,
}

fn session_response(id: String, entry: &SessionEntry) -> ApiResult<SessionResponse> {
    let session = entry.session.lock().expect("session poisoned");
    Ok(SessionResponse {
        id,
        model: entry.model.clone(),
        view: SessionView::new(&session)?,
    })
}

async fn create_session(State(state): State<Arc<AppState>>, body: String) -> ApiResult<impl IntoResponse> {
    let req: CreateSession = parse_body(&body)?;
    let model = state.model(&req.model)?;
    let id = state.fresh_id("s");
    let response = blocking(move || {
        let session = match req.plan {
            Some(plan) => Session::new(model, plan, req.principle.unwrap_or(Principle::Deontology))?,
            None => Session::start(model, req.principle)?,
        };
        let entry = SessionEntry {
            model: req.model,
            session: Arc::new(Mutex::new(session)),
        };
        let response = session_response(id.clone(), &entry)?;
        state
            .sessions
            .write()
            .expect("session store poisoned")
            .insert(id, entry);
        Ok(response)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(response)))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SessionResponse>> {
    let entry = state.session(&id)?;
    Ok(Json(blocking(move || session_response(id, &entry)).await?))
}

async fn ask(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<ContrastiveView>> {
    let q: ContrastiveQuestion = parse_body(&body)?;
    let q = ContrastiveQuestion::new(q.constraint, q.principle)?;
    let entry = state.session(&id)?;
    let view = blocking(move || {
        let mut session = entry.session.lock().expect("session poisoned");
        let ce = session.ask(q)?;
        let model = session.model();
        Ok(ContrastiveView::new(&ce, model, model.verbalizations()))
    })
    .await?;
    Ok(Json(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Adopt {
    plan: Plan,
}

async fn adopt(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<SessionResponse>> {
    let req: Adopt = parse_body(&body)?;
    let entry = state.session(&id)?;
    let response = blocking(move || {
        entry.session.lock().expect("session poisoned").adopt(req.plan)?;
        session_response(id, &entry)
    })
    .await?;
    Ok(Json(response))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/models", post(create_model))
        .route("/models/{id}", get(get_model))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/questions", post(ask))
        .route("/sessions/{id}/adopt", post(adopt))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::default()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
