//! Reference agent runner: plays environments through a model endpoint
//! with a fixed system prompt and no harness.
//!
//! Each turn the model sees the system prompt, its previous reply, and the
//! latest frames rendered as text together with the available actions. The
//! last action token in the reply is executed. Endpoint failures are retried
//! and never count as actions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Duration;

use gridbench::recording::Recorder;
use gridbench::scoring::{score_counts, EnvironmentScorecard, HumanBaseline, Scorecard, ScoringError};
use gridbench::{
    Action, ActionKind, EngineError, EnvironmentSpec, Frame, FrameSequence, Recording, Registry, Session, Source, Status,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SYSTEM_PROMPT: &str = "You are playing a game. Your goal is to win. Reply with the exact action you want to take. The final action in your reply will be executed next turn. Your entire reply will be carried to the next turn.";

/// Sent once when a reply contains no usable action.
pub const FORMAT_REMINDER: &str = "Your reply did not contain an available action. End your reply with one of the available actions.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EndpointError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("endpoint answered {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed endpoint response: {0}")]
    Malformed(String),
}

/// A chat model. Implementations must not count or alter actions; they only
/// turn a conversation into a reply.
pub trait ModelEndpoint {
    fn complete(&mut self, messages: &[Message]) -> Result<String, EndpointError>;
}

/// An OpenAI-compatible `/chat/completions` endpoint.
pub struct OpenAiEndpoint {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
}

impl OpenAiEndpoint {
    /// `base_url` is the API root, e.g. `http://localhost:8000/v1`. The key,
    /// if any, is read from the environment variable `key_var`.
    pub fn new(base_url: &str, model: &str, key_var: &str) -> Self {
        Self {
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(600))
                .build()
                .expect("http client"),
            url: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            model: model.to_string(),
            api_key: std::env::var(key_var).ok().filter(|k| !k.is_empty()),
        }
    }
}

impl ModelEndpoint for OpenAiEndpoint {
    fn complete(&mut self, messages: &[Message]) -> Result<String, EndpointError> {
        let body = serde_json::json!({ "model": self.model, "messages": messages });
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| EndpointError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| EndpointError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(EndpointError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| EndpointError::Malformed(e.to_string()))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| EndpointError::Malformed("no choices[0].message.content".into()))
    }
}

/// Answers with a fixed list of replies, then repeats the last one.
#[derive(Debug, Clone)]
pub struct ScriptedEndpoint {
    replies: Vec<String>,
    next: usize,
    /// Conversations received, for inspection.
    pub seen: Vec<Vec<Message>>,
}

impl ScriptedEndpoint {
    pub fn new(replies: Vec<String>) -> Self {
        Self {
            replies,
            next: 0,
            seen: Vec::new(),
        }
    }

    /// Replays a recording's actions, one per reply.
    pub fn replaying(rec: &Recording) -> Self {
        Self::new(rec.actions.iter().map(|a| format!("I will play {}.", a.action)).collect())
    }
}

impl ModelEndpoint for ScriptedEndpoint {
    fn complete(&mut self, messages: &[Message]) -> Result<String, EndpointError> {
        self.seen.push(messages.to_vec());
        let i = self.next.min(self.replies.len().saturating_sub(1));
        self.next += 1;
        self.replies
            .get(i)
            .cloned()
            .ok_or_else(|| EndpointError::Malformed("empty script".into()))
    }
}

/// Always gives the same reply.
#[derive(Debug, Clone)]
pub struct ConstantEndpoint(pub String);

impl ModelEndpoint for ConstantEndpoint {
    fn complete(&mut self, _: &[Message]) -> Result<String, EndpointError> {
        Ok(self.0.clone())
    }
}

/// Wraps an endpoint and fails the calls whose 0-based numbers are listed.
pub struct FlakyEndpoint<E> {
    pub inner: E,
    pub fail_on: Vec<usize>,
    pub calls: usize,
}

impl<E: ModelEndpoint> FlakyEndpoint<E> {
    pub fn new(inner: E, fail_on: Vec<usize>) -> Self {
        Self { inner, fail_on, calls: 0 }
    }
}

impl<E: ModelEndpoint> ModelEndpoint for FlakyEndpoint<E> {
    fn complete(&mut self, messages: &[Message]) -> Result<String, EndpointError> {
        let n = self.calls;
        self.calls += 1;
        if self.fail_on.contains(&n) {
            return Err(EndpointError::Transport(format!("injected failure on call {n}")));
        }
        self.inner.complete(messages)
    }
}

/// One line per row, cells as space-separated integers.
pub fn render_frame(frame: &Frame) -> String {
    let mut out = String::with_capacity(frame.as_bytes().len() * 3);
    for row in frame.rows() {
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{c}");
        }
        out.push('\n');
    }
    out
}

/// How each available action is written in a reply.
pub fn action_syntax(spec: &EnvironmentSpec) -> Vec<String> {
    ActionKind::ALL
        .into_iter()
        .filter(|k| spec.accepts(*k))
        .map(|k| match k {
            ActionKind::Select => "SELECT x y".to_string(),
            k => k.name().to_string(),
        })
        .collect()
}

/// The user message for one turn: a pure function of the frames and the
/// action set.
pub fn turn_message(frames: &FrameSequence, spec: &EnvironmentSpec) -> String {
    let mut out = String::new();
    let n = frames.len();
    for (i, f) in frames.frames().iter().enumerate() {
        let _ = writeln!(out, "Frame {} of {}:", i + 1, n);
        out.push_str(&render_frame(f));
    }
    let _ = write!(out, "Available actions: {}", action_syntax(spec).join(", "));
    out
}

/// The last action in `reply` that `spec` accepts. Recognized forms are the
/// key tokens `KEY1`..`KEY5`, `UNDO`, `RESET`, and `SELECT` followed by two
/// integers (`SELECT 3 4`, `SELECT:3,4`, `SELECT(3, 4)`), in any case.
pub fn parse_reply(reply: &str, spec: &EnvironmentSpec) -> Option<Action> {
    let words: Vec<String> = reply
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_ascii_uppercase)
        .collect();
    let mut found = None;
    for (i, w) in words.iter().enumerate() {
        let action = match w.as_str() {
            "SELECT" => match (words.get(i + 1), words.get(i + 2)) {
                (Some(x), Some(y)) => match (x.parse::<u32>(), y.parse::<u32>()) {
                    (Ok(x), Ok(y)) => Action::select(x, y).ok(),
                    _ => None,
                },
                _ => None,
            },
            w => w.parse::<ActionKind>().ok().and_then(Action::from_kind),
        };
        if let Some(a) = action.filter(|a| spec.accepts(a.kind())) {
            found = Some(a);
        }
    }
    found
}

/// Submitted when a reply stays unusable after the reminder: the first
/// declared action that leaves the current state unchanged, found by trying
/// each candidate on a copy of the session. If every candidate changes the
/// state, the first declared key.
pub fn fallback_action(session: &Session) -> Action {
    let spec = session.spec();
    let mut candidates: Vec<Action> = Action::KEYS
        .into_iter()
        .chain([Action::Undo])
        .filter(|a| spec.action_set.contains(a.kind()))
        .collect();
    if spec.action_set.contains(ActionKind::Select) {
        candidates.extend([Action::Select { x: 0, y: 0 }, Action::Select { x: 63, y: 63 }]);
    }
    candidates
        .iter()
        .copied()
        .find(|&a| {
            let mut probe = session.clone();
            probe.act(a).is_ok_and(|flags| !flags.action_was_valid)
        })
        .or_else(|| candidates.first().copied())
        .unwrap_or(Action::Reset)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRunConfig {
    pub dataset: Vec<String>,
    /// Per-level action budget as a multiple of the human baseline.
    pub cutoff_multiplier: u64,
    pub system_prompt: String,
    /// Attempts per turn before an endpoint error ends the run.
    pub max_attempts: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff: Duration,
    pub seed: u64,
    pub actor: String,
    /// Per-level budget for games without a baseline.
    pub unbaselined_budget: u64,
}

impl Default for AgentRunConfig {
    fn default() -> Self {
        Self {
            dataset: vec!["smp1".into(), "smp2".into()],
            cutoff_multiplier: gridbench::scoring::CUTOFF_MULTIPLIER,
            system_prompt: SYSTEM_PROMPT.to_string(),
            max_attempts: 4,
            backoff: Duration::from_millis(500),
            seed: 0,
            actor: "agent".into(),
            unbaselined_budget: 500,
        }
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("the dataset is empty")]
    EmptyDataset,
    #[error("cutoff multiplier must be at least 1")]
    BadCutoff,
    #[error("{game_id}: endpoint failed {attempts} times: {last}")]
    Endpoint {
        game_id: String,
        attempts: u32,
        last: EndpointError,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("{0}")]
    Recording(String),
}

#[derive(Debug, Clone)]
pub struct EnvironmentRun {
    pub recording: Recording,
    /// Present when a baseline exists for the game.
    pub scorecard: Option<EnvironmentScorecard>,
    /// Endpoint calls that failed and were retried.
    pub retries: u64,
    /// Replies that needed the format reminder.
    pub reminders: u64,
    /// Actions chosen by fallback after an unusable reply.
    pub fallbacks: u64,
    pub cut_off: bool,
}

#[derive(Debug, Clone)]
pub struct AgentRunReport {
    pub runs: Vec<EnvironmentRun>,
    /// Over the games that have a baseline.
    pub scorecard: Option<Scorecard>,
}

struct Caller<'a> {
    endpoint: &'a mut dyn ModelEndpoint,
    config: &'a AgentRunConfig,
    game_id: String,
    retries: u64,
}

impl Caller<'_> {
    fn call(&mut self, messages: &[Message]) -> Result<String, AgentError> {
        let mut delay = self.config.backoff;
        let mut attempt = 1;
        loop {
            match self.endpoint.complete(messages) {
                Ok(reply) => return Ok(reply),
                Err(e) if attempt >= self.config.max_attempts => {
                    return Err(AgentError::Endpoint {
                        game_id: self.game_id.clone(),
                        attempts: attempt,
                        last: e,
                    })
                }
                Err(e) => {
                    tracing::warn!("{}: endpoint error, retrying: {e}", self.game_id);
                    self.retries += 1;
                    attempt += 1;
                    std::thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                }
            }
        }
    }
}

/// Plays every game of the dataset in order and scores the runs.
pub fn run_reference_agent(
    endpoint: &mut dyn ModelEndpoint,
    registry: &Registry,
    baselines: &HashMap<String, HumanBaseline>,
    config: &AgentRunConfig,
) -> Result<AgentRunReport, AgentError> {
    if config.dataset.is_empty() {
        return Err(AgentError::EmptyDataset);
    }
    if config.cutoff_multiplier < 1 {
        return Err(AgentError::BadCutoff);
    }
    let mut runs = Vec::new();
    for game_id in &config.dataset {
        runs.push(run_environment(endpoint, registry, baselines.get(game_id), game_id, config)?);
    }
    let cards: Vec<EnvironmentScorecard> = runs.iter().filter_map(|r| r.scorecard.clone()).collect();
    let scorecard = if cards.is_empty() { None } else { Some(Scorecard::new(cards)?) };
    Ok(AgentRunReport { runs, scorecard })
}

fn run_environment(
    endpoint: &mut dyn ModelEndpoint,
    registry: &Registry,
    baseline: Option<&HumanBaseline>,
    game_id: &str,
    config: &AgentRunConfig,
) -> Result<EnvironmentRun, AgentError> {
    let env = registry.get(game_id)?;
    let spec = env.spec().clone();
    let budget = |level: u32| match baseline {
        Some(b) => config.cutoff_multiplier * b.h(level),
        None => config.unbaselined_budget,
    };
    let mut recorder =
        Recorder::new(env, config.seed, Source::Agent, &config.actor).map_err(|e| AgentError::Recording(e.to_string()))?;
    let mut caller = Caller {
        endpoint,
        config,
        game_id: game_id.to_string(),
        retries: 0,
    };
    let (mut reminders, mut fallbacks) = (0, 0);
    let mut carried: Option<String> = None;
    let mut cut_off = false;

    while recorder.session().status() == Status::InProgress {
        let session = recorder.session();
        let level = session.level();
        if session.action_counts()[level as usize - 1] >= budget(level) {
            cut_off = true;
            break;
        }
        let mut messages = vec![Message::new(Role::System, config.system_prompt.clone())];
        if let Some(prev) = &carried {
            messages.push(Message::new(Role::Assistant, prev.clone()));
        }
        messages.push(Message::new(Role::User, turn_message(session.frames(), &spec)));

        let mut reply = caller.call(&messages)?;
        let mut action = parse_reply(&reply, &spec);
        if action.is_none() {
            reminders += 1;
            messages.push(Message::new(Role::Assistant, reply.clone()));
            messages.push(Message::new(Role::User, FORMAT_REMINDER));
            reply = caller.call(&messages)?;
            action = parse_reply(&reply, &spec);
        }
        let action = action.unwrap_or_else(|| {
            fallbacks += 1;
            fallback_action(recorder.session())
        });
        carried = Some(reply);
        recorder.step(action)?;
    }

    let recording = recorder.finish();
    let scorecard = baseline
        .map(|b| {
            // Score against the runner's own cutoff, not the default one.
            let counts = recording.level_counts();
            let mut card = score_counts(&counts, recording.levels_completed(), b)?;
            card.cut_off |= cut_off;
            Ok::<_, ScoringError>(card)
        })
        .transpose()?;
    Ok(EnvironmentRun {
        recording,
        scorecard,
        retries: caller.retries,
        reminders,
        fallbacks,
        cut_off,
    })
}
