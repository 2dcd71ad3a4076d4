//! Session lifecycle and the deterministic step loop.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use thiserror::Error;

use crate::action::{Action, ActionKind};
use crate::digest::{state_digest, StateDigest};
use crate::env::{EnvRng, Environment, EnvironmentSpec, LevelEvent, LevelState};
use crate::frame::{Frame, FrameSequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown game id {0:?}")]
    UnknownGameId(String),
    #[error("session is terminal ({0})")]
    SessionTerminal(Status),
    #[error("action {0} is not offered by this environment")]
    UnsupportedAction(ActionKind),
    #[error("level {level} is outside 1..={level_count}")]
    LevelOutOfRange { level: u32, level_count: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    InProgress,
    EnvironmentComplete,
    GameOver,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::InProgress => "IN_PROGRESS",
            Status::EnvironmentComplete => "ENVIRONMENT_COMPLETE",
            Status::GameOver => "GAME_OVER",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The result of one submitted action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub frames: FrameSequence,
    pub level_completed: bool,
    pub environment_completed: bool,
    pub game_over: bool,
    /// False when the action left the state untouched.
    pub action_was_valid: bool,
    /// Digest of the state after the action.
    pub state_hash: StateDigest,
    /// Level the action was applied to.
    pub level: u32,
}

/// The flags of a [`Transition`], without frames or digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepFlags {
    pub level_completed: bool,
    pub environment_completed: bool,
    pub game_over: bool,
    pub action_was_valid: bool,
    pub level: u32,
}

/// One play-through of an environment, starting from a level's reset state.
///
/// A session only changes when an action is submitted. Every accepted
/// action is counted against the level it was applied to, including
/// Undo, Reset and actions that had no effect.
#[derive(Clone)]
pub struct Session {
    env: Arc<dyn Environment>,
    seed: u64,
    rng: EnvRng,
    level: u32,
    state: Box<dyn LevelState>,
    status: Status,
    action_counts: Vec<u64>,
    history: Vec<Box<dyn LevelState>>,
    frames: FrameSequence,
    digest: StateDigest,
    scratch: Vec<u8>,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("game_id", &self.spec().game_id)
            .field("seed", &self.seed)
            .field("level", &self.level)
            .field("status", &self.status)
            .field("action_counts", &self.action_counts)
            .field("digest", &self.digest)
            .finish()
    }
}

impl Session {
    /// Opens a session at level 1.
    pub fn open(env: Arc<dyn Environment>, seed: u64) -> Self {
        Self::open_at_level(env, seed, 1).expect("level 1 always exists")
    }

    /// Opens a session directly at `level`'s reset state. Earlier levels are
    /// recorded with zero actions. Used by validation to study one level.
    pub fn open_at_level(env: Arc<dyn Environment>, seed: u64, level: u32) -> Result<Self, EngineError> {
        let level_count = env.spec().level_count;
        if level == 0 || level > level_count {
            return Err(EngineError::LevelOutOfRange { level, level_count });
        }
        let state = env.reset_state(level);
        let mut frame = Frame::filled(0);
        state.render(&mut frame);
        let mut session = Self {
            seed,
            rng: EnvRng::seed_from_u64(seed),
            level,
            state,
            status: Status::InProgress,
            action_counts: vec![0; level as usize],
            history: Vec::new(),
            frames: FrameSequence::single(frame),
            digest: StateDigest(0),
            scratch: Vec::with_capacity(64),
            env,
        };
        session.refresh_digest();
        Ok(session)
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        self.env.spec()
    }

    pub fn environment(&self) -> &Arc<dyn Environment> {
        &self.env
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn status(&self) -> Status {
        self.status
    }

    /// Per-level action counts, one entry per level entered.
    pub fn action_counts(&self) -> &[u64] {
        &self.action_counts
    }

    pub fn total_actions(&self) -> u64 {
        self.action_counts.iter().sum()
    }

    /// The frames emitted by the most recent action (or the reset frame).
    pub fn frames(&self) -> &FrameSequence {
        &self.frames
    }

    pub fn state_digest(&self) -> StateDigest {
        self.digest
    }

    pub fn level_state(&self) -> &dyn LevelState {
        self.state.as_ref()
    }

    pub fn undo_depth(&self) -> usize {
        self.history.len()
    }

    pub fn undo(&mut self) -> Result<Transition, EngineError> {
        self.step(Action::Undo)
    }

    pub fn reset_level(&mut self) -> Result<Transition, EngineError> {
        self.step(Action::Reset)
    }

    pub fn step(&mut self, action: Action) -> Result<Transition, EngineError> {
        let r = self.act(action)?;
        Ok(Transition {
            frames: self.frames.clone(),
            level_completed: r.level_completed,
            environment_completed: r.environment_completed,
            game_over: r.game_over,
            action_was_valid: r.action_was_valid,
            state_hash: self.digest,
            level: r.level,
        })
    }

    /// Like [`Session::step`] but without copying the emitted frames; read
    /// them from [`Session::frames`] if needed.
    pub fn act(&mut self, action: Action) -> Result<StepFlags, EngineError> {
        if self.status != Status::InProgress {
            return Err(EngineError::SessionTerminal(self.status));
        }
        let kind = action.kind();
        if !self.spec().accepts(kind) {
            return Err(EngineError::UnsupportedAction(kind));
        }
        let level = self.level;
        self.action_counts[level as usize - 1] += 1;

        let mut level_completed = false;
        let mut environment_completed = false;
        let mut game_over = false;
        let mut frames = Vec::new();

        let valid = match action {
            Action::Reset => {
                let before = self.digest;
                self.state = self.env.reset_state(level);
                self.history.clear();
                frames.push(self.render_state());
                self.refresh_digest_with(frames.last().unwrap());
                before != self.digest
            }
            Action::Undo => match self.history.pop() {
                Some(prev) => {
                    self.state = prev;
                    true
                }
                None => false,
            },
            _ => {
                let snapshot = self.state.clone_box();
                let outcome = self.state.step(action, &mut self.rng);
                frames = outcome.animation;
                let valid = outcome.changed || outcome.event != LevelEvent::None;
                if valid {
                    self.history.push(snapshot);
                }
                match outcome.event {
                    LevelEvent::None => {}
                    LevelEvent::Lost => {
                        game_over = true;
                        self.status = Status::GameOver;
                    }
                    LevelEvent::Won => {
                        level_completed = true;
                        if level == self.spec().level_count {
                            environment_completed = true;
                            self.status = Status::EnvironmentComplete;
                        } else {
                            // Show the winning state, then move on.
                            frames.push(self.render_state());
                            self.level += 1;
                            self.action_counts.push(0);
                            self.state = self.env.reset_state(self.level);
                            self.history.clear();
                        }
                    }
                }
                valid
            }
        };

        if !matches!(action, Action::Reset) {
            frames.push(self.render_state());
            self.refresh_digest_with(frames.last().unwrap());
        }
        self.frames = FrameSequence::new(frames).expect("at least the settled frame");

        Ok(StepFlags {
            level_completed,
            environment_completed,
            game_over,
            action_was_valid: valid,
            level,
        })
    }

    fn render_state(&self) -> Frame {
        let mut frame = Frame::filled(0);
        self.state.render(&mut frame);
        frame
    }

    fn refresh_digest(&mut self) {
        let frame = self.frames.last().clone();
        self.refresh_digest_with(&frame);
    }

    fn refresh_digest_with(&mut self, frame: &Frame) {
        let mut buf = std::mem::take(&mut self.scratch);
        buf.clear();
        self.state.encode(&mut buf);
        self.digest = state_digest(self.level, self.spec().state_version, &buf, frame);
        self.scratch = buf;
    }
}
