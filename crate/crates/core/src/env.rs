//! The environment authoring interface.
//!
//! An [`Environment`] is an immutable definition: a spec plus a factory for
//! each level's reset state. A [`LevelState`] is the mutable hidden state of
//! one level. The engine drives it one action at a time and never touches it
//! between actions.
//!
//! Authors must keep these contracts:
//!
//! * `step` is deterministic given the state, the action and the generator.
//! * `render` is a pure function of the state and paints every cell.
//! * `encode` captures everything that influences future behaviour, so two
//!   states with equal encodings are interchangeable.
//! * `step` only ever sees key actions and `Select`; Undo and Reset are
//!   handled by the session.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::action::{Action, ActionKind, ActionSet};
use crate::frame::{Frame, GRID_SIZE};

/// The only source of randomness an environment may use.
pub type EnvRng = ChaCha8Rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("game id {0:?} must be exactly four ASCII alphanumeric characters")]
    BadGameId(String),
    #[error("an environment needs at least one level")]
    NoLevels,
    #[error("the action set is empty")]
    EmptyActionSet,
    #[error("tutorial level {0} is outside the level range")]
    BadTutorialLevel(u32),
    #[error("level {level}: {reason}")]
    BadLevel { level: u32, reason: String },
}

/// Four-character environment identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameId([u8; 4]);

impl GameId {
    pub fn new(id: &str) -> Result<Self, SpecError> {
        let bytes = id.as_bytes();
        if bytes.len() != 4 || !bytes.iter().all(u8::is_ascii_alphanumeric) {
            return Err(SpecError::BadGameId(id.to_string()));
        }
        Ok(GameId([bytes[0], bytes[1], bytes[2], bytes[3]]))
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("game ids are ASCII")
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GameId({})", self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvironmentSpec {
    pub game_id: GameId,
    pub level_count: u32,
    /// Declared actions. Reset is available everywhere regardless.
    pub action_set: ActionSet,
    pub tutorial_level: u32,
    /// False for oracle subjects and fixtures that must never enter a
    /// benchmark set.
    pub benchmark: bool,
    /// Version of the hidden-state encoding; part of every digest.
    pub state_version: u16,
}

impl EnvironmentSpec {
    pub fn new(game_id: &str, level_count: u32, action_set: ActionSet) -> Result<Self, SpecError> {
        let game_id = GameId::new(game_id)?;
        if level_count == 0 {
            return Err(SpecError::NoLevels);
        }
        if action_set.without(ActionKind::Reset).is_empty() {
            return Err(SpecError::EmptyActionSet);
        }
        Ok(Self {
            game_id,
            level_count,
            action_set,
            tutorial_level: 1,
            benchmark: true,
            state_version: 1,
        })
    }

    pub fn non_benchmark(mut self) -> Self {
        self.benchmark = false;
        self
    }

    pub fn with_state_version(mut self, version: u16) -> Self {
        self.state_version = version;
        self
    }

    pub fn with_tutorial_level(mut self, level: u32) -> Result<Self, SpecError> {
        if level == 0 || level > self.level_count {
            return Err(SpecError::BadTutorialLevel(level));
        }
        self.tutorial_level = level;
        Ok(self)
    }

    /// Whether `kind` may be submitted to a session of this environment.
    pub fn accepts(&self, kind: ActionKind) -> bool {
        kind == ActionKind::Reset || self.action_set.contains(kind)
    }

    /// Kinds whose effect depends only on the current state. Undo depends on
    /// the trajectory and Reset on the level, so both are excluded.
    pub fn state_actions(&self) -> ActionSet {
        self.action_set
            .without(ActionKind::Undo)
            .without(ActionKind::Reset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelEvent {
    None,
    Won,
    Lost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub changed: bool,
    pub event: LevelEvent,
    /// Intermediate frames shown before the settled state, oldest first.
    pub animation: Vec<Frame>,
}

impl StepOutcome {
    pub fn unchanged() -> Self {
        Self {
            changed: false,
            event: LevelEvent::None,
            animation: Vec::new(),
        }
    }

    pub fn changed() -> Self {
        Self {
            changed: true,
            event: LevelEvent::None,
            animation: Vec::new(),
        }
    }

    pub fn with_event(mut self, event: LevelEvent) -> Self {
        if event != LevelEvent::None {
            self.changed = true;
        }
        self.event = event;
        self
    }

    pub fn with_animation(mut self, animation: Vec<Frame>) -> Self {
        self.animation = animation;
        self
    }
}

/// A set of Select coordinates with identical effect in the current state,
/// represented by one cell. `weight` is the number of cells in the class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectClass {
    pub x: u8,
    pub y: u8,
    pub weight: u32,
}

impl SelectClass {
    pub fn action(&self) -> Action {
        Action::Select { x: self.x, y: self.y }
    }
}

/// Every cell as its own class; the conservative default.
pub fn singleton_select_classes() -> Vec<SelectClass> {
    (0..GRID_SIZE as u8)
        .flat_map(|y| (0..GRID_SIZE as u8).map(move |x| SelectClass { x, y, weight: 1 }))
        .collect()
}

/// Partitions the grid into `active` cells (each its own class) and one
/// class for every remaining cell, which must all be no-ops.
pub fn active_select_classes(active: &[(u8, u8)]) -> Vec<SelectClass> {
    let mut classes: Vec<SelectClass> = active
        .iter()
        .map(|&(x, y)| SelectClass { x, y, weight: 1 })
        .collect();
    let rest = (GRID_SIZE * GRID_SIZE) as u32 - classes.len() as u32;
    if rest > 0 {
        let inert = (0..GRID_SIZE as u8)
            .flat_map(|y| (0..GRID_SIZE as u8).map(move |x| (x, y)))
            .find(|c| !active.contains(c))
            .expect("at least one inert cell");
        classes.push(SelectClass {
            x: inert.0,
            y: inert.1,
            weight: rest,
        });
    }
    classes
}

pub trait LevelState: Send + Sync + fmt::Debug {
    fn step(&mut self, action: Action, rng: &mut EnvRng) -> StepOutcome;

    fn render(&self, frame: &mut Frame);

    fn encode(&self, out: &mut Vec<u8>);

    /// The level's win predicate.
    fn is_won(&self) -> bool;

    /// Partition of the 4096 Select coordinates into equal-effect classes.
    /// Only consulted when Select is in the action set.
    fn select_classes(&self) -> Vec<SelectClass> {
        singleton_select_classes()
    }

    fn clone_box(&self) -> Box<dyn LevelState>;
}

impl Clone for Box<dyn LevelState> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

pub trait Environment: Send + Sync {
    fn spec(&self) -> &EnvironmentSpec;

    /// A fresh reset state for `level` (1-based, within range).
    fn reset_state(&self, level: u32) -> Box<dyn LevelState>;

    /// Short labels naming the mechanics a level exercises.
    fn mechanics(&self, _level: u32) -> Vec<&'static str> {
        Vec::new()
    }
}
