//! Seeded action traces and bit-exact re-execution.
//!
//! A recording stores the seed, every submitted action, the level it was
//! applied to and the digest of the resulting state. Replaying re-runs the
//! actions on a fresh session and compares digests one by one, so the first
//! divergence is located exactly.
//!
//! # File format
//!
//! Line-oriented UTF-8, `\n` line endings, no trailing whitespace:
//!
//! ```text
//! gridbench-recording 1
//! game <game_id>
//! seed <u64>
//! source <human|agent|authored>
//! actor <id: printable ASCII, no spaces>
//! outcome <win|loss|incomplete>
//! levels <levels entered>
//! actions <count>
//! <level> <action token> <digest: 16 hex digits> <elapsed ms | ->
//! ...
//! ```
//!
//! Action tokens are `KEY1`..`KEY5`, `UNDO`, `RESET` and `SELECT:x,y`.
//! Elapsed times are informational and never replayed.

use std::fmt::{self, Write as _};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::action::Action;
use crate::digest::StateDigest;
use crate::env::{Environment, GameId};
use crate::frame::FrameSequence;
use crate::registry::Registry;
use crate::session::{EngineError, Session, Status, Transition};

pub const FORMAT_HEADER: &str = "gridbench-recording 1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordingError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("actor id {0:?} must be non-empty printable ASCII without spaces")]
    BadActor(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("index {index} is outside 0..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("replay diverged at action {index}: {reason}")]
    Diverged { index: usize, reason: MismatchReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Win,
    Loss,
    Incomplete,
}

impl Outcome {
    pub fn from_status(status: Status) -> Self {
        match status {
            Status::EnvironmentComplete => Outcome::Win,
            Status::GameOver => Outcome::Loss,
            Status::InProgress => Outcome::Incomplete,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Outcome::Win => "win",
            Outcome::Loss => "loss",
            Outcome::Incomplete => "incomplete",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "win" => Ok(Outcome::Win),
            "loss" => Ok(Outcome::Loss),
            "incomplete" => Ok(Outcome::Incomplete),
            _ => Err(format!("unknown outcome {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Human,
    Agent,
    Authored,
}

impl Source {
    fn token(self) -> &'static str {
        match self {
            Source::Human => "human",
            Source::Agent => "agent",
            Source::Authored => "authored",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Source::Human),
            "agent" => Ok(Source::Agent),
            "authored" => Ok(Source::Authored),
            _ => Err(format!("unknown source {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordedAction {
    pub action: Action,
    /// Level the action was applied to.
    pub level: u32,
    /// Digest of the state after the action.
    pub digest: StateDigest,
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recording {
    pub game_id: GameId,
    pub seed: u64,
    pub source: Source,
    pub actor: String,
    pub outcome: Outcome,
    /// Levels entered, including one reached by the final action.
    pub levels_entered: u32,
    pub actions: Vec<RecordedAction>,
}

fn valid_actor(actor: &str) -> bool {
    !actor.is_empty() && actor.bytes().all(|b| b.is_ascii_graphic())
}

impl Recording {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn action_list(&self) -> Vec<Action> {
        self.actions.iter().map(|a| a.action).collect()
    }

    /// Actions per level entered, as a session would report them.
    pub fn level_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.levels_entered.max(1) as usize];
        for a in &self.actions {
            if let Some(c) = counts.get_mut(a.level as usize - 1) {
                *c += 1;
            }
        }
        counts
    }

    /// Every level left behind, plus the last one when the recording is a win.
    pub fn levels_completed(&self) -> u32 {
        match self.outcome {
            Outcome::Win => self.levels_entered,
            _ => self.levels_entered.saturating_sub(1),
        }
    }

    pub fn duration_ms(&self) -> Option<u64> {
        self.actions.last().and_then(|a| a.elapsed_ms)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(64 + self.actions.len() * 40);
        writeln!(out, "{FORMAT_HEADER}").unwrap();
        writeln!(out, "game {}", self.game_id).unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "source {}", self.source.token()).unwrap();
        writeln!(out, "actor {}", self.actor).unwrap();
        writeln!(out, "outcome {}", self.outcome.token()).unwrap();
        writeln!(out, "levels {}", self.levels_entered).unwrap();
        writeln!(out, "actions {}", self.actions.len()).unwrap();
        for a in &self.actions {
            write!(out, "{} {} {} ", a.level, a.action, a.digest).unwrap();
            match a.elapsed_ms {
                Some(ms) => writeln!(out, "{ms}").unwrap(),
                None => out.push_str("-\n"),
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, RecordingError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| RecordingError::Parse {
                line: 0,
                message: format!("missing {what}"),
            })
        };
        let err = |line: usize, message: String| RecordingError::Parse { line, message };

        let (n, header) = next("header")?;
        if header != FORMAT_HEADER {
            return Err(err(n, format!("expected {FORMAT_HEADER:?}")));
        }
        fn field<'a>(line: (usize, &'a str), key: &str) -> Result<(usize, &'a str), RecordingError> {
            let (n, text) = line;
            text.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(|v| (n, v))
                .ok_or_else(|| RecordingError::Parse {
                    line: n,
                    message: format!("expected `{key} <value>`"),
                })
        }
        let (n, game) = field(next("game")?, "game")?;
        let game_id = GameId::new(game).map_err(|e| err(n, e.to_string()))?;
        let (n, seed) = field(next("seed")?, "seed")?;
        let seed = seed.parse().map_err(|_| err(n, "bad seed".into()))?;
        let (n, source) = field(next("source")?, "source")?;
        let source = source.parse().map_err(|e| err(n, e))?;
        let (n, actor) = field(next("actor")?, "actor")?;
        if !valid_actor(actor) {
            return Err(err(n, format!("bad actor {actor:?}")));
        }
        let (n, outcome) = field(next("outcome")?, "outcome")?;
        let outcome = outcome.parse().map_err(|e| err(n, e))?;
        let (n, levels) = field(next("levels")?, "levels")?;
        let levels_entered: u32 = levels.parse().map_err(|_| err(n, "bad level count".into()))?;
        if levels_entered == 0 {
            return Err(err(n, "at least one level is entered".into()));
        }
        let (n, count) = field(next("actions")?, "actions")?;
        let count: usize = count.parse().map_err(|_| err(n, "bad action count".into()))?;

        let mut actions = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = next("action line")?;
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 4 {
                return Err(err(n, "expected `<level> <action> <digest> <elapsed>`".into()));
            }
            let level: u32 = parts[0].parse().map_err(|_| err(n, "bad level".into()))?;
            if level == 0 || level > levels_entered {
                return Err(err(n, "level outside the levels entered".into()));
            }
            let action: Action = parts[1].parse().map_err(|e| err(n, format!("{e}")))?;
            if parts[2].len() != 16 {
                return Err(err(n, "digest must be 16 hex digits".into()));
            }
            let digest: StateDigest = parts[2].parse().map_err(|_| err(n, "bad digest".into()))?;
            let elapsed_ms = match parts[3] {
                "-" => None,
                ms => Some(ms.parse().map_err(|_| err(n, "bad elapsed time".into()))?),
            };
            actions.push(RecordedAction {
                action,
                level,
                digest,
                elapsed_ms,
            });
        }
        if let Ok((n, extra)) = next("end") {
            return Err(err(n, format!("unexpected trailing line {extra:?}")));
        }
        Ok(Recording {
            game_id,
            seed,
            source,
            actor: actor.to_string(),
            outcome,
            levels_entered,
            actions,
        })
    }
}

impl fmt::Display for Recording {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Drives a fresh session and records every accepted action.
pub struct Recorder {
    session: Session,
    recording: Recording,
    clock: Option<Instant>,
}

impl Recorder {
    pub fn new(env: Arc<dyn Environment>, seed: u64, source: Source, actor: &str) -> Result<Self, RecordingError> {
        if !valid_actor(actor) {
            return Err(RecordingError::BadActor(actor.to_string()));
        }
        let recording = Recording {
            game_id: env.spec().game_id,
            seed,
            source,
            actor: actor.to_string(),
            outcome: Outcome::Incomplete,
            levels_entered: 1,
            actions: Vec::new(),
        };
        Ok(Self {
            session: Session::open(env, seed),
            recording,
            clock: Some(Instant::now()),
        })
    }

    /// Stores no timestamps, so recordings of equal action sequences are
    /// byte-identical.
    pub fn without_clock(mut self) -> Self {
        self.clock = None;
        self
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn step(&mut self, action: Action) -> Result<Transition, EngineError> {
        let elapsed = self.clock.map(|c| c.elapsed().as_millis() as u64);
        self.step_at(action, elapsed)
    }

    /// Steps with an explicit elapsed time, for clients that keep their own clock.
    pub fn step_at(&mut self, action: Action, elapsed_ms: Option<u64>) -> Result<Transition, EngineError> {
        let transition = self.session.step(action)?;
        self.recording.actions.push(RecordedAction {
            action,
            level: transition.level,
            digest: transition.state_hash,
            elapsed_ms,
        });
        self.recording.outcome = Outcome::from_status(self.session.status());
        self.recording.levels_entered = self.session.action_counts().len() as u32;
        Ok(transition)
    }

    /// The recording so far.
    pub fn recording(&self) -> &Recording {
        &self.recording
    }

    pub fn finish(self) -> Recording {
        self.recording
    }
}

/// Runs `actions` through a recorder with no clock.
pub fn record_actions(
    env: Arc<dyn Environment>,
    seed: u64,
    source: Source,
    actor: &str,
    actions: &[Action],
) -> Result<Recording, ReplayError> {
    let mut rec = Recorder::new(env, seed, source, actor)
        .expect("caller passes a valid actor")
        .without_clock();
    for (index, &a) in actions.iter().enumerate() {
        rec.step(a).map_err(|e| match e {
            EngineError::SessionTerminal(_) | EngineError::UnsupportedAction(_) => ReplayError::Diverged {
                index,
                reason: MismatchReason::Rejected,
            },
            other => ReplayError::Engine(other),
        })?;
    }
    Ok(rec.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MismatchReason {
    /// The recomputed digest differs from the stored one.
    Digest,
    /// The action was applied to a different level than recorded.
    Level,
    /// The session refused the action (terminal or unsupported).
    Rejected,
    /// The environment panicked.
    Panicked,
    /// Every digest matched but the final outcome differs.
    Outcome,
}

impl fmt::Display for MismatchReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MismatchReason::Digest => "state digest differs",
            MismatchReason::Level => "level differs",
            MismatchReason::Rejected => "action rejected",
            MismatchReason::Panicked => "environment panicked",
            MismatchReason::Outcome => "outcome differs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayVerdict {
    Identical,
    /// First divergence; `index == len` means only the outcome differs.
    Mismatch { index: usize, reason: MismatchReason },
}

impl ReplayVerdict {
    pub fn is_identical(&self) -> bool {
        matches!(self, ReplayVerdict::Identical)
    }
}

pub fn replay(registry: &Registry, rec: &Recording) -> Result<ReplayVerdict, ReplayError> {
    let env = registry.get(rec.game_id.as_str())?;
    Ok(replay_on(env, rec))
}

/// Replays against a specific environment build.
pub fn replay_on(env: Arc<dyn Environment>, rec: &Recording) -> ReplayVerdict {
    let mut session = Session::open(env, rec.seed);
    for (index, stored) in rec.actions.iter().enumerate() {
        if session.level() != stored.level {
            return ReplayVerdict::Mismatch { index, reason: MismatchReason::Level };
        }
        let result = catch_unwind(AssertUnwindSafe(|| session.step(stored.action)));
        match result {
            Err(_) => return ReplayVerdict::Mismatch { index, reason: MismatchReason::Panicked },
            Ok(Err(_)) => return ReplayVerdict::Mismatch { index, reason: MismatchReason::Rejected },
            Ok(Ok(t)) if t.state_hash != stored.digest => {
                return ReplayVerdict::Mismatch { index, reason: MismatchReason::Digest }
            }
            Ok(Ok(_)) => {}
        }
    }
    if Outcome::from_status(session.status()) != rec.outcome {
        return ReplayVerdict::Mismatch {
            index: rec.actions.len(),
            reason: MismatchReason::Outcome,
        };
    }
    ReplayVerdict::Identical
}

/// Frames visible after the `index`-th action; index 0 is the reset frame.
pub fn frames_at(registry: &Registry, rec: &Recording, index: usize) -> Result<FrameSequence, ReplayError> {
    let env = registry.get(rec.game_id.as_str())?;
    frames_at_on(env, rec, index)
}

pub fn frames_at_on(env: Arc<dyn Environment>, rec: &Recording, index: usize) -> Result<FrameSequence, ReplayError> {
    if index > rec.actions.len() {
        return Err(ReplayError::IndexOutOfRange {
            index,
            len: rec.actions.len(),
        });
    }
    let mut session = Session::open(env, rec.seed);
    for (i, stored) in rec.actions[..index].iter().enumerate() {
        session.step(stored.action).map_err(|_| ReplayError::Diverged {
            index: i,
            reason: MismatchReason::Rejected,
        })?;
    }
    Ok(session.frames().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::Tiny;

    fn tiny() -> Arc<dyn Environment> {
        Arc::new(Tiny::new())
    }

    #[test]
    fn records_digests_and_outcome() {
        // Level 1: up then right reaches the exit.
        let rec = record_actions(tiny(), 3, Source::Authored, "t", &[Action::Key1, Action::Key4, Action::Key3]).unwrap();
        assert_eq!(rec.len(), 3);
        assert_eq!(rec.actions[0].level, 1);
        assert_eq!(rec.actions[1].level, 1);
        assert_eq!(rec.actions[2].level, 2);
        assert_eq!(rec.level_counts(), vec![2, 1]);
        assert_eq!(rec.levels_completed(), 1);
        assert_eq!(rec.outcome, Outcome::Incomplete);
        assert_eq!(replay_on(tiny(), &rec), ReplayVerdict::Identical);
    }

    #[test]
    fn text_round_trip() {
        let mut rec = record_actions(tiny(), 9, Source::Human, "p-07", &[Action::Key2]).unwrap();
        rec.actions[0].elapsed_ms = Some(1234);
        let text = rec.to_text();
        assert!(text.starts_with("gridbench-recording 1\ngame tiny\nseed 9\nsource human\nactor p-07\noutcome loss\nlevels 1\nactions 1\n1 KEY2 "));
        assert!(text.ends_with(" 1234\n"));
        assert_eq!(Recording::parse(&text).unwrap(), rec);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "gridbench-recording 1\ngame tiny\nseed x\n";
        assert!(matches!(Recording::parse(text), Err(RecordingError::Parse { line: 3, .. })));
        let rec = record_actions(tiny(), 0, Source::Agent, "a", &[Action::Key1]).unwrap();
        let extra = format!("{}junk\n", rec.to_text());
        assert!(matches!(Recording::parse(&extra), Err(RecordingError::Parse { line: 10, .. })));
    }

    #[test]
    fn tampering_is_located() {
        let mut rec = record_actions(tiny(), 0, Source::Agent, "a", &[Action::Key3, Action::Key4, Action::Key1]).unwrap();
        rec.actions[1].digest.0 ^= 0xff;
        assert_eq!(
            replay_on(tiny(), &rec),
            ReplayVerdict::Mismatch { index: 1, reason: MismatchReason::Digest }
        );
    }

    #[test]
    fn frames_at_bounds() {
        let rec = record_actions(tiny(), 0, Source::Agent, "a", &[Action::Key3]).unwrap();
        let reset = Session::open(tiny(), 0).frames().clone();
        assert_eq!(frames_at_on(tiny(), &rec, 0).unwrap(), reset);
        assert!(matches!(
            frames_at_on(tiny(), &rec, 2),
            Err(ReplayError::IndexOutOfRange { index: 2, len: 1 })
        ));
    }

    #[test]
    fn bad_actor_rejected() {
        assert!(Recorder::new(tiny(), 0, Source::Human, "has space").is_err());
        assert!(Recorder::new(tiny(), 0, Source::Human, "").is_err());
    }
}
