//! Local HTTP facade over the core for the designer UI.
//!
//! The service holds one current circuit with a revision counter and any
//! number of simulation sessions. Sessions capture the circuit they were
//! opened on; replacing the circuit closes them all, so no session ever mixes
//! revisions. Each session sits behind its own lock, which serializes its
//! operations while distinct sessions proceed concurrently.

use std::collections::{BTreeSet, HashMap};
use std::convert::Infallible;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use minforge_core::io::{circuit_from_str, circuit_to_string, LoadOptions};
use minforge_core::paths::PathError;
use minforge_core::render::{plan_circuit_with, plan_simulation_frame, svg_string, RenderError};
use minforge_core::sim::{Outcome, DEFAULT_DURATION_TICKS};
use minforge_core::{
    generate_extra_stage, generate_omega, generate_replicated, max_disjoint_paths, open_session, run, validate,
    Circuit, CircuitDocument, DropParity, FaultSet, FormatError, PathSpec, PathState, RenderOptions, SimConfig,
    SimError, SimEvent, SimSession,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const DEFAULT_PORT: u16 = 7420;
pub const PORT_ENV: &str = "MINFORGE_PORT";

/// Port from `MINFORGE_PORT`, else [`DEFAULT_PORT`].
pub fn port_from_env() -> u16 {
    std::env::var(PORT_ENV).ok().and_then(|p| p.parse().ok()).unwrap_or(DEFAULT_PORT)
}

/// Loopback address on `port`.
pub fn loopback(port: u16) -> SocketAddr {
    SocketAddr::from((Ipv4Addr::LOCALHOST, port))
}

struct Current {
    revision: u64,
    circuit: Circuit,
}

struct SessionEntry {
    revision: u64,
    session: tokio::sync::Mutex<SimSession>,
}

struct Inner {
    current: RwLock<Current>,
    sessions: Mutex<HashMap<u64, Arc<SessionEntry>>>,
    next_session: AtomicU64,
}

/// Shared service state. Cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(circuit: Circuit) -> Self {
        AppState(Arc::new(Inner {
            current: RwLock::new(Current { revision: 1, circuit }),
            sessions: Mutex::new(HashMap::new()),
            next_session: AtomicU64::new(1),
        }))
    }

    fn snapshot(&self) -> (u64, Circuit) {
        let cur = self.0.current.read().unwrap();
        (cur.revision, cur.circuit.clone())
    }

    fn session(&self, id: u64) -> Result<Arc<SessionEntry>, ApiError> {
        self.0
            .sessions
            .lock()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no open session {id}")))
    }
}

/// Error response: a status plus a JSON body `{"error": ..., ...detail}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    fn with(mut self, key: &str, detail: impl Serialize) -> Self {
        self.body[key] = serde_json::to_value(detail).expect("detail serializes");
        self
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<FormatError> for ApiError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::InvalidCircuit(v) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid circuit").with("violations", v)
            }
            other => ApiError::bad_request(other),
        }
    }
}

impl From<PathError> for ApiError {
    fn from(e: PathError) -> Self {
        let status = match e {
            PathError::NoPath { .. } | PathError::UnknownComponent(_) => StatusCode::NOT_FOUND,
            PathError::InvalidCircuit(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<SimError> for ApiError {
    fn from(e: SimError) -> Self {
        let message = e.to_string();
        match e {
            SimError::ValidationFailed(report) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message).with("report", report)
            }
            SimError::UnknownComponent(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message),
            SimError::SessionClosed => ApiError::new(StatusCode::NOT_FOUND, message),
            SimError::ZeroDuration | SimError::PastEnd { .. } => ApiError::bad_request(message),
        }
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::ValidationFailed(report) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation failed").with("report", report)
            }
            RenderError::InvalidCircuit(v) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid circuit").with("violations", v)
            }
            RenderError::Sink(e) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn document_value(circuit: &Circuit) -> Value {
    let text = circuit_to_string(&CircuitDocument::new(circuit.clone())).expect("in-memory serialization");
    serde_json::from_str(&text).expect("canonical document is JSON")
}

/// All routes under `/api`.
pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/circuit", get(get_circuit).put(put_circuit))
        .route("/api/generate", post(generate))
        .route("/api/validate", post(validate_input))
        .route("/api/paths", get(paths))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(session_handle).delete(delete_session))
        .route("/api/sessions/{id}/step", post(step_session))
        .route("/api/sessions/{id}/faults", post(change_faults))
        .route("/api/sessions/{id}/stream", get(stream_session))
        .route("/api/render.svg", get(render_svg))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn get_circuit(State(app): State<AppState>) -> Json<Value> {
    let (revision, circuit) = app.snapshot();
    Json(json!({ "revision": revision, "document": document_value(&circuit) }))
}

#[derive(Deserialize)]
struct RevisionQuery {
    revision: Option<u64>,
}

async fn put_circuit(
    State(app): State<AppState>,
    Query(q): Query<RevisionQuery>,
    body: String,
) -> ApiResult<Json<Value>> {
    let doc = circuit_from_str(&body, LoadOptions::default())?;
    let revision = {
        let mut cur = app.0.current.write().unwrap();
        if let Some(expected) = q.revision {
            if expected != cur.revision {
                return Err(ApiError::new(StatusCode::CONFLICT, "revision conflict")
                    .with("current_revision", cur.revision));
            }
        }
        cur.revision += 1;
        cur.circuit = doc.circuit;
        // sessions belong to the old revision
        app.0.sessions.lock().unwrap().clear();
        cur.revision
    };
    Ok(Json(json!({ "revision": revision })))
}

#[derive(Deserialize)]
struct GenerateRequest {
    family: String,
    size: usize,
    copies: Option<usize>,
}

async fn generate(Json(req): Json<GenerateRequest>) -> ApiResult<Json<Value>> {
    let circuit = match req.family.as_str() {
        "omega" => generate_omega(req.size),
        "extra-stage" | "extra_stage" => generate_extra_stage(req.size),
        "replicated" => generate_omega(req.size).and_then(|base| generate_replicated(&base, req.copies.unwrap_or(2))),
        other => return Err(ApiError::bad_request(format!("unknown family {other:?}"))),
    }
    .map_err(ApiError::bad_request)?;
    Ok(Json(document_value(&circuit)))
}

#[derive(Deserialize)]
struct ValidateRequest {
    path: String,
    #[serde(default)]
    faults: String,
}

async fn validate_input(State(app): State<AppState>, Json(req): Json<ValidateRequest>) -> ApiResult<Json<Value>> {
    let path = PathSpec::parse(&req.path)?;
    let faults = FaultSet::parse(&req.faults)?;
    let (_, circuit) = app.snapshot();
    Ok(Json(serde_json::to_value(validate(&circuit, &path, &faults)).unwrap()))
}

#[derive(Deserialize)]
struct PathsQuery {
    src: usize,
    dst: usize,
    k: Option<usize>,
}

async fn paths(State(app): State<AppState>, Query(q): Query<PathsQuery>) -> ApiResult<Json<Value>> {
    let (_, circuit) = app.snapshot();
    let result = max_disjoint_paths(&circuit, q.src, q.dst, q.k.unwrap_or(3))?;
    Ok(Json(serde_json::to_value(result).unwrap()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Running,
    Finished,
    Closed,
}

/// Public view of a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionHandle {
    pub id: u64,
    pub state: SessionState,
    pub revision: u64,
    pub cursor: u64,
    pub duration_ticks: u64,
    pub faults: BTreeSet<usize>,
}

fn handle(id: u64, revision: u64, s: &SimSession) -> SessionHandle {
    let state = if s.is_closed() {
        SessionState::Closed
    } else if s.is_finished() {
        SessionState::Finished
    } else {
        SessionState::Running
    };
    SessionHandle {
        id,
        state,
        revision,
        cursor: s.cursor(),
        duration_ticks: s.config().duration_ticks,
        faults: s.faults().clone(),
    }
}

#[derive(Deserialize)]
struct SessionRequest {
    path: String,
    #[serde(default)]
    faults: String,
    ticks: Option<u64>,
    #[serde(default)]
    parity: DropParity,
}

async fn create_session(
    State(app): State<AppState>,
    Json(req): Json<SessionRequest>,
) -> ApiResult<(StatusCode, Json<SessionHandle>)> {
    let path = PathSpec::parse(&req.path)?;
    let faults = FaultSet::parse(&req.faults)?;
    let config = SimConfig { duration_ticks: req.ticks.unwrap_or(DEFAULT_DURATION_TICKS), drop_parity: req.parity };
    // hold the read lock so a concurrent PUT cannot slip between opening and registering
    let cur = app.0.current.read().unwrap();
    let session = open_session(&cur.circuit, &path, &faults, config)?;
    let id = app.0.next_session.fetch_add(1, Ordering::Relaxed);
    let h = handle(id, cur.revision, &session);
    let entry = SessionEntry { revision: cur.revision, session: tokio::sync::Mutex::new(session) };
    app.0.sessions.lock().unwrap().insert(id, Arc::new(entry));
    Ok((StatusCode::CREATED, Json(h)))
}

async fn session_handle(State(app): State<AppState>, Path(id): Path<u64>) -> ApiResult<Json<SessionHandle>> {
    let entry = app.session(id)?;
    let s = entry.session.lock().await;
    Ok(Json(handle(id, entry.revision, &s)))
}

#[derive(Deserialize)]
struct StepRequest {
    #[serde(default = "one")]
    n: u64,
}

fn one() -> u64 {
    1
}

#[derive(Serialize)]
struct StepResponse {
    events: Vec<SimEvent>,
    session: SessionHandle,
}

async fn step_session(
    State(app): State<AppState>,
    Path(id): Path<u64>,
    Json(req): Json<StepRequest>,
) -> ApiResult<Json<StepResponse>> {
    let entry = app.session(id)?;
    let mut s = entry.session.lock().await;
    let events = s.step(req.n)?.to_vec();
    Ok(Json(StepResponse { events, session: handle(id, entry.revision, &s) }))
}

#[derive(Deserialize)]
struct FaultChange {
    #[serde(default)]
    add: Vec<usize>,
    #[serde(default)]
    remove: Vec<usize>,
}

async fn change_faults(
    State(app): State<AppState>,
    Path(id): Path<u64>,
    Json(req): Json<FaultChange>,
) -> ApiResult<Json<Value>> {
    let entry = app.session(id)?;
    let mut s = entry.session.lock().await;
    // check everything first so a bad id leaves the fault set untouched
    if let Some(&bad) = req.add.iter().chain(&req.remove).find(|&&c| c >= s.circuit().no_cmp()) {
        return Err(SimError::UnknownComponent(bad).into());
    }
    for &c in &req.add {
        s.inject_fault(c)?;
    }
    for &c in &req.remove {
        s.remove_fault(c)?;
    }
    Ok(Json(json!({ "faults": s.faults(), "effective_from_tick": s.cursor() })))
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<u64>) -> ApiResult<Json<Value>> {
    let entry = app.0.sessions.lock().unwrap().remove(&id);
    let entry = entry.ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no open session {id}")))?;
    let mut s = entry.session.lock().await;
    let report = s.close()?;
    Ok(Json(json!({ "session": handle(id, entry.revision, &s), "report": report })))
}

#[derive(Deserialize)]
struct StreamQuery {
    /// Pause between tick events, for live animation.
    #[serde(default)]
    interval_ms: u64,
}

#[derive(Serialize)]
struct Summary {
    delivered: u64,
    dropped: u64,
    ticks: u64,
    partial: bool,
}

enum StreamStep {
    Running,
    Done,
}

/// Advances the session one tick per event until it finishes, then sends a
/// `summary` event over every tick the session has run. If the session is
/// closed underneath the stream, a final `closed` event ends it.
async fn stream_session(
    State(app): State<AppState>,
    Path(id): Path<u64>,
    Query(q): Query<StreamQuery>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    app.session(id)?;
    let interval = Duration::from_millis(q.interval_ms);
    let stream = futures::stream::unfold(StreamStep::Running, move |step| {
        let app = app.clone();
        async move {
            if let StreamStep::Done = step {
                return None;
            }
            let Ok(entry) = app.session(id) else {
                return Some((Ok(Event::default().event("closed").data(id.to_string())), StreamStep::Done));
            };
            let event = {
                let mut s = entry.session.lock().await;
                if s.is_finished() {
                    None
                } else {
                    Some(s.step(1).expect("session has ticks left")[0])
                }
            };
            match event {
                Some(e) => {
                    if !interval.is_zero() {
                        tokio::time::sleep(interval).await;
                    }
                    let data = serde_json::to_string(&e).unwrap();
                    Some((Ok(Event::default().event("tick").id(e.tick.to_string()).data(data)), StreamStep::Running))
                }
                None => {
                    let s = entry.session.lock().await;
                    let dropped = s.events().iter().filter(|e| e.outcome == Outcome::Dropped).count() as u64;
                    let ticks = s.events().len() as u64;
                    let summary = Summary {
                        delivered: ticks - dropped,
                        dropped,
                        ticks,
                        partial: ticks < s.config().duration_ticks,
                    };
                    let data = serde_json::to_string(&summary).unwrap();
                    Some((Ok(Event::default().event("summary").data(data)), StreamStep::Done))
                }
            }
        }
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

#[derive(Deserialize)]
struct RenderQuery {
    path: Option<String>,
    #[serde(default)]
    faults: String,
    state: Option<PathState>,
    /// Tick whose path state to draw, as computed by a batch run.
    frame: Option<u64>,
    #[serde(default)]
    parity: DropParity,
    #[serde(default)]
    bug_compat: bool,
}

async fn render_svg(State(app): State<AppState>, Query(q): Query<RenderQuery>) -> ApiResult<Response> {
    let (_, circuit) = app.snapshot();
    let opts = RenderOptions { bug_compat: q.bug_compat };
    let plan = match q.path.as_deref().filter(|p| !p.is_empty()) {
        None => plan_circuit_with(&circuit, opts)?,
        Some(raw) => {
            let path = PathSpec::parse(raw)?;
            let faults = FaultSet::parse(&q.faults)?;
            let state = match q.frame {
                Some(tick) => {
                    let config = SimConfig { duration_ticks: tick + 1, drop_parity: q.parity };
                    run(&circuit, &path, &faults, config)?.events[tick as usize].state()
                }
                None => q.state.unwrap_or(PathState::Green),
            };
            plan_simulation_frame(&circuit, &path, &faults, state, opts)?
        }
    };
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg_string(&plan)).into_response())
}
