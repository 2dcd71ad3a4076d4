//! The action space: five keys, Undo, Reset and coordinate Select.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::frame::GRID_SIZE;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("select coordinate ({x}, {y}) is outside the 64x64 grid")]
    OutOfBounds { x: u32, y: u32 },
    #[error("unrecognized action token {0:?}")]
    BadToken(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Key1,
    Key2,
    Key3,
    Key4,
    Key5,
    Undo,
    Reset,
    Select,
}

impl ActionKind {
    pub const ALL: [ActionKind; 8] = [
        ActionKind::Key1,
        ActionKind::Key2,
        ActionKind::Key3,
        ActionKind::Key4,
        ActionKind::Key5,
        ActionKind::Undo,
        ActionKind::Reset,
        ActionKind::Select,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Key1 => "KEY1",
            ActionKind::Key2 => "KEY2",
            ActionKind::Key3 => "KEY3",
            ActionKind::Key4 => "KEY4",
            ActionKind::Key5 => "KEY5",
            ActionKind::Undo => "UNDO",
            ActionKind::Reset => "RESET",
            ActionKind::Select => "SELECT",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionKind {
    type Err = ActionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ActionError::BadToken(s.to_string()))
    }
}

/// A single submitted action. `Select` carries an in-bounds grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Key1,
    Key2,
    Key3,
    Key4,
    Key5,
    Undo,
    Reset,
    Select { x: u8, y: u8 },
}

impl Action {
    pub const KEYS: [Action; 5] = [
        Action::Key1,
        Action::Key2,
        Action::Key3,
        Action::Key4,
        Action::Key5,
    ];

    pub fn select(x: u32, y: u32) -> Result<Self, ActionError> {
        if x as usize >= GRID_SIZE || y as usize >= GRID_SIZE {
            return Err(ActionError::OutOfBounds { x, y });
        }
        Ok(Action::Select {
            x: x as u8,
            y: y as u8,
        })
    }

    pub fn kind(self) -> ActionKind {
        match self {
            Action::Key1 => ActionKind::Key1,
            Action::Key2 => ActionKind::Key2,
            Action::Key3 => ActionKind::Key3,
            Action::Key4 => ActionKind::Key4,
            Action::Key5 => ActionKind::Key5,
            Action::Undo => ActionKind::Undo,
            Action::Reset => ActionKind::Reset,
            Action::Select { .. } => ActionKind::Select,
        }
    }

    /// The parameterless action of `kind`; `None` for `Select`.
    pub fn from_kind(kind: ActionKind) -> Option<Self> {
        Some(match kind {
            ActionKind::Key1 => Action::Key1,
            ActionKind::Key2 => Action::Key2,
            ActionKind::Key3 => Action::Key3,
            ActionKind::Key4 => Action::Key4,
            ActionKind::Key5 => Action::Key5,
            ActionKind::Undo => Action::Undo,
            ActionKind::Reset => Action::Reset,
            ActionKind::Select => return None,
        })
    }

    pub fn coord(self) -> Option<(u8, u8)> {
        match self {
            Action::Select { x, y } => Some((x, y)),
            _ => None,
        }
    }
}

/// Canonical token form: `KEY1`..`KEY5`, `UNDO`, `RESET`, `SELECT:x,y`.
impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Select { x, y } => write!(f, "SELECT:{x},{y}"),
            other => f.write_str(other.kind().name()),
        }
    }
}

impl FromStr for Action {
    type Err = ActionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ActionError::BadToken(s.to_string());
        if let Some((head, coords)) = s.split_once(':') {
            if !head.eq_ignore_ascii_case("SELECT") {
                return Err(bad());
            }
            let (x, y) = coords.split_once(',').ok_or_else(bad)?;
            let x: u32 = x.trim().parse().map_err(|_| bad())?;
            let y: u32 = y.trim().parse().map_err(|_| bad())?;
            return Action::select(x, y);
        }
        let kind: ActionKind = s.parse()?;
        Action::from_kind(kind).ok_or_else(bad)
    }
}

/// A subset of the action kinds, as declared by an environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ActionSet(u8);

impl ActionSet {
    pub const fn empty() -> Self {
        ActionSet(0)
    }

    pub fn of(kinds: &[ActionKind]) -> Self {
        kinds.iter().fold(ActionSet(0), |s, k| s.with(*k))
    }

    pub fn with(self, kind: ActionKind) -> Self {
        ActionSet(self.0 | kind.bit())
    }

    pub fn without(self, kind: ActionKind) -> Self {
        ActionSet(self.0 & !kind.bit())
    }

    pub fn contains(self, kind: ActionKind) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Kinds in canonical order.
    pub fn kinds(self) -> impl Iterator<Item = ActionKind> {
        ActionKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.kinds().map(ActionKind::name).collect();
        f.write_str(&names.join(" "))
    }
}
