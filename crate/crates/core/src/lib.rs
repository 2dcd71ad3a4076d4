//! Turn-based 64x64 grid environments for measuring action efficiency.
//!
//! * [`session`]: the deterministic step loop, with Undo, Reset and
//!   per-level action counting.
//! * [`envs`]: built-in environments and test fixtures.
//! * [`validation`]: random-play qualification and state-graph analysis.
//! * [`scoring`]: level efficiency, environment and benchmark scores, human
//!   baselines.
//! * [`recording`]: action traces that replay bit for bit.

pub mod action;
pub mod digest;
pub mod env;
pub mod envs;
pub mod frame;
pub mod recording;
pub mod registry;
pub mod scoring;
pub mod session;
pub mod validation;

pub use action::{Action, ActionKind, ActionSet};
pub use digest::StateDigest;
pub use env::{Environment, EnvironmentSpec, GameId, LevelEvent, LevelState, StepOutcome};
pub use frame::{Frame, FrameSequence, COLOR_COUNT, GRID_SIZE, PALETTE};
pub use recording::{replay, Outcome, Recorder, Recording, ReplayVerdict, Source};
pub use registry::Registry;
pub use session::{EngineError, Session, Status, Transition};
