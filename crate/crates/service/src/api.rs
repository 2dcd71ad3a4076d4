//! The HTTP session service.
//!
//! | method | path | |
//! |---|---|---|
//! | `POST` | `/sessions` | open a session |
//! | `POST` | `/sessions/{token}/actions` | submit one action |
//! | `GET` | `/sessions/{token}/frames` | latest frames and counters |
//! | `GET` | `/sessions/{token}/scorecard` | counts and live scores |
//! | `GET` | `/sessions/{token}/recording` | the session as a recording file |
//! | `GET` | `/games` | registered environments |
//! | `POST` | `/recordings/frames` | frames of a recording at an index |
//!
//! Errors are `{"error": "..."}` with status 404 (unknown game or token),
//! 409 (session already over), 400 (malformed request) or 429 (session
//! quota reached). Reads never change a session.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, PoisonError};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gridbench::envs::committed_baseline;
use gridbench::recording::{frames_at, Recorder, ReplayError};
use gridbench::scoring::{score_counts, HumanBaseline};
use gridbench::{EngineError, Recording, Registry, Source};

use crate::wire::{
    available_actions, frames_to_wire, ActionRequest, ErrorBody, FramesRequest, FramesView, GameView, OpenRequest,
    ScorecardView, SessionView, TransitionView,
};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Live sessions allowed at once.
    pub max_sessions: usize,
    /// Sessions untouched for this long are dropped.
    pub idle_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_sessions: 1024,
            idle_timeout: Duration::from_secs(60 * 60),
        }
    }
}

struct Live {
    recorder: Recorder,
    last_used: Instant,
}

pub struct AppState {
    registry: Registry,
    baselines: HashMap<String, HumanBaseline>,
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Live>>>>,
}

impl AppState {
    /// Loads the committed baseline of every registered game that has one.
    pub fn new(registry: Registry, config: ServiceConfig) -> Self {
        let baselines = registry
            .game_ids()
            .into_iter()
            .filter_map(|g| committed_baseline(&g).map(|b| (g, b)))
            .collect();
        Self {
            registry,
            baselines,
            config,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_baseline(mut self, baseline: HumanBaseline) -> Self {
        self.baselines.insert(baseline.game_id.clone(), baseline);
        self
    }

    pub fn live_sessions(&self) -> usize {
        self.sessions.lock().unwrap_or_else(PoisonError::into_inner).len()
    }

    fn sweep(&self, sessions: &mut HashMap<String, Arc<Mutex<Live>>>) {
        let timeout = self.config.idle_timeout;
        sessions.retain(|_, live| {
            let live = live.lock().unwrap_or_else(PoisonError::into_inner);
            live.last_used.elapsed() < timeout
        });
    }

    fn session(&self, token: &str) -> Result<Arc<Mutex<Live>>, ApiError> {
        let mut sessions = self.sessions.lock().unwrap_or_else(PoisonError::into_inner);
        self.sweep(&mut sessions);
        sessions
            .get(token)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no live session {token:?}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match e {
            EngineError::UnknownGameId(_) => StatusCode::NOT_FOUND,
            EngineError::SessionTerminal(_) => StatusCode::CONFLICT,
            EngineError::UnsupportedAction(_) | EngineError::LevelOutOfRange { .. } => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/games", get(games))
        .route("/sessions", post(open))
        .route("/sessions/{token}/actions", post(act))
        .route("/sessions/{token}/frames", get(frames))
        .route("/sessions/{token}/scorecard", get(scorecard))
        .route("/sessions/{token}/recording", get(recording))
        .route("/recordings/frames", post(recording_frames))
        .with_state(state)
}

async fn games(State(state): State<Arc<AppState>>) -> Json<Vec<GameView>> {
    Json(
        state
            .registry
            .specs()
            .iter()
            .map(|s| GameView {
                game_id: s.game_id.to_string(),
                level_count: s.level_count,
                tutorial_level: s.tutorial_level,
                benchmark: s.benchmark,
                available_actions: available_actions(s),
                has_baseline: state.baselines.contains_key(s.game_id.as_str()),
            })
            .collect(),
    )
}

async fn open(
    State(state): State<Arc<AppState>>,
    body: Result<Json<OpenRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let Json(req) = body?;
    let env = state.registry.get(&req.game_id)?;
    let source = match req.source.as_deref() {
        None | Some("human") => Source::Human,
        Some("agent") => Source::Agent,
        Some(other) => return Err(ApiError::bad_request(format!("source must be human or agent, not {other:?}"))),
    };
    let actor = req.actor.unwrap_or_else(|| "anonymous".to_string());
    let seed = req.seed.unwrap_or_else(rand_seed);
    let recorder = Recorder::new(env, seed, source, &actor).map_err(|e| ApiError::bad_request(e.to_string()))?;

    let token = uuid::Uuid::new_v4().to_string();
    let view = SessionView::of(&token, recorder.session());
    let mut sessions = state.sessions.lock().unwrap_or_else(PoisonError::into_inner);
    state.sweep(&mut sessions);
    if sessions.len() >= state.config.max_sessions {
        return Err(ApiError::new(StatusCode::TOO_MANY_REQUESTS, "session quota reached"));
    }
    sessions.insert(
        token,
        Arc::new(Mutex::new(Live {
            recorder,
            last_used: Instant::now(),
        })),
    );
    Ok((StatusCode::CREATED, Json(view)))
}

fn rand_seed() -> u64 {
    u64::from_le_bytes(uuid::Uuid::new_v4().as_bytes()[..8].try_into().expect("8 bytes"))
}

async fn act(
    State(state): State<Arc<AppState>>,
    Path(token): Path<String>,
    body: Result<Json<ActionRequest>, JsonRejection>,
) -> ApiResult<Json<TransitionView>> {
    let live = state.session(&token)?;
    let Json(req) = body?;
    let action = req.parse().map_err(ApiError::bad_request)?;
    let mut live = live.lock().unwrap_or_else(PoisonError::into_inner);
    live.last_used = Instant::now();
    let t = live.recorder.step(action)?;
    let session = live.recorder.session();
    Ok(Json(TransitionView {
        action: action.to_string(),
        action_was_valid: t.action_was_valid,
        level_completed: t.level_completed,
        environment_completed: t.environment_completed,
        game_over: t.game_over,
        applied_level: t.level,
        level: session.level(),
        status: session.status().name().to_string(),
        action_counts: session.action_counts().to_vec(),
        state_hash: t.state_hash.to_string(),
        frames: frames_to_wire(&t.frames),
    }))
}

async fn frames(State(state): State<Arc<AppState>>, Path(token): Path<String>) -> ApiResult<Json<SessionView>> {
    let live = state.session(&token)?;
    let live = live.lock().unwrap_or_else(PoisonError::into_inner);
    Ok(Json(SessionView::of(&token, live.recorder.session())))
}

async fn scorecard(State(state): State<Arc<AppState>>, Path(token): Path<String>) -> ApiResult<Json<ScorecardView>> {
    let live = state.session(&token)?;
    let live = live.lock().unwrap_or_else(PoisonError::into_inner);
    let session = live.recorder.session();
    let rec = live.recorder.recording();
    let game_id = session.spec().game_id.to_string();
    let view = ScorecardView {
        token: token.clone(),
        game_id: game_id.clone(),
        status: session.status().name().to_string(),
        levels_completed: rec.levels_completed(),
        action_counts: session.action_counts().to_vec(),
        baseline_sha256: None,
        levels: None,
        score: None,
        cut_off: None,
    };
    Ok(Json(match state.baselines.get(&game_id) {
        Some(baseline) => {
            let card = score_counts(session.action_counts(), rec.levels_completed(), baseline)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
            view.with_card(&card)
        }
        None => view,
    }))
}

async fn recording(State(state): State<Arc<AppState>>, Path(token): Path<String>) -> ApiResult<String> {
    let live = state.session(&token)?;
    let live = live.lock().unwrap_or_else(PoisonError::into_inner);
    Ok(live.recorder.recording().to_text())
}

async fn recording_frames(
    State(state): State<Arc<AppState>>,
    body: Result<Json<FramesRequest>, JsonRejection>,
) -> ApiResult<Json<FramesView>> {
    let Json(req) = body?;
    let rec = Recording::parse(&req.recording).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let frames = frames_at(&state.registry, &rec, req.index).map_err(|e| match e {
        ReplayError::Engine(e) => ApiError::from(e),
        other => ApiError::bad_request(other.to_string()),
    })?;
    let level_starts = rec
        .actions
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].level != w[1].level)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(Json(FramesView {
        index: req.index,
        level_starts,
        frames: frames_to_wire(&frames),
    }))
}

/// Serves the API on `addr` until the process is interrupted.
pub async fn serve(addr: std::net::SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
