//! Small environments with known properties, used as test subjects.
//!
//! None of these are benchmark environments.

use std::sync::Arc;

use crate::action::{Action, ActionKind, ActionSet};
use crate::env::{
    active_select_classes, EnvRng, Environment, EnvironmentSpec, LevelEvent, LevelState,
    SelectClass, StepOutcome,
};
use crate::frame::{Frame, GRID_SIZE};
use crate::recording::{record_actions, Source};
use crate::registry::Registry;

fn keys(kinds: &[ActionKind]) -> ActionSet {
    ActionSet::of(kinds)
}

/// `one1`: a single state whose only action wins.
#[derive(Debug)]
pub struct OneStep {
    spec: EnvironmentSpec,
}

impl OneStep {
    pub fn new() -> Self {
        Self {
            spec: EnvironmentSpec::new("one1", 1, keys(&[ActionKind::Key1]))
                .unwrap()
                .non_benchmark(),
        }
    }
}

impl Default for OneStep {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for OneStep {
    fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    fn reset_state(&self, _level: u32) -> Box<dyn LevelState> {
        Box::new(Counter { value: 0, modulus: 2, win_at: Some(1), lose_at: None })
    }
}

/// `loop`: two states joined by Key1 in both directions; Key2 does nothing.
/// No win is reachable.
#[derive(Debug)]
pub struct Sealed {
    spec: EnvironmentSpec,
}

impl Sealed {
    pub fn new() -> Self {
        Self {
            spec: EnvironmentSpec::new("loop", 1, keys(&[ActionKind::Key1, ActionKind::Key2]))
                .unwrap()
                .non_benchmark(),
        }
    }
}

impl Default for Sealed {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Sealed {
    fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    fn reset_state(&self, _level: u32) -> Box<dyn LevelState> {
        Box::new(Counter { value: 0, modulus: 2, win_at: None, lose_at: None })
    }
}

/// Key1 steps a counter modulo `modulus`; Key2 is a no-op.
#[derive(Debug, Clone)]
struct Counter {
    value: u32,
    modulus: u32,
    win_at: Option<u32>,
    lose_at: Option<u32>,
}

impl LevelState for Counter {
    fn step(&mut self, action: Action, _rng: &mut EnvRng) -> StepOutcome {
        if action != Action::Key1 {
            return StepOutcome::unchanged();
        }
        self.value = (self.value + 1) % self.modulus;
        if Some(self.value) == self.win_at {
            StepOutcome::changed().with_event(LevelEvent::Won)
        } else if Some(self.value) == self.lose_at {
            StepOutcome::changed().with_event(LevelEvent::Lost)
        } else {
            StepOutcome::changed()
        }
    }

    fn render(&self, frame: &mut Frame) {
        frame.as_bytes_mut().fill(0);
        frame.set(self.value as usize % GRID_SIZE, 0, 4);
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.value.to_le_bytes());
    }

    fn is_won(&self) -> bool {
        Some(self.value) == self.win_at
    }

    fn clone_box(&self) -> Box<dyn LevelState> {
        Box::new(self.clone())
    }
}

/// `crsh`: panics when cell (0, 0) is selected. Key1 toggles a light.
#[derive(Debug)]
pub struct Crashy {
    spec: EnvironmentSpec,
}

impl Crashy {
    pub fn new() -> Self {
        Self {
            spec: EnvironmentSpec::new("crsh", 1, keys(&[ActionKind::Key1, ActionKind::Select]))
                .unwrap()
                .non_benchmark(),
        }
    }
}

impl Default for Crashy {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Crashy {
    fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    fn reset_state(&self, _level: u32) -> Box<dyn LevelState> {
        Box::new(CrashyState { light: false })
    }
}

#[derive(Debug, Clone)]
struct CrashyState {
    light: bool,
}

impl LevelState for CrashyState {
    fn step(&mut self, action: Action, _rng: &mut EnvRng) -> StepOutcome {
        match action {
            Action::Select { x: 0, y: 0 } => panic!("injected fault at cell (0, 0)"),
            Action::Key1 => {
                self.light = !self.light;
                StepOutcome::changed()
            }
            _ => StepOutcome::unchanged(),
        }
    }

    fn render(&self, frame: &mut Frame) {
        frame.as_bytes_mut().fill(if self.light { 4 } else { 0 });
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.light as u8);
    }

    fn is_won(&self) -> bool {
        false
    }

    fn select_classes(&self) -> Vec<SelectClass> {
        active_select_classes(&[(0, 0)])
    }

    fn clone_box(&self) -> Box<dyn LevelState> {
        Box::new(self.clone())
    }
}

/// `dgn1`: a degenerate environment. Level 1 is won by Key2. Level 2 is a
/// walk on positions `0..=span` starting at 1: Key1 steps toward 0 (lost),
/// Key2 toward `span` (won). A uniform random walk wins level 2 with
/// probability exactly `1 / span`.
#[derive(Debug)]
pub struct Ruin {
    spec: EnvironmentSpec,
    span: u32,
}

impl Ruin {
    pub const DEFAULT_SPAN: u32 = 500;

    pub fn new() -> Self {
        Self::with_span(Self::DEFAULT_SPAN)
    }

    pub fn with_span(span: u32) -> Self {
        assert!((2..=4000).contains(&span));
        Self {
            spec: EnvironmentSpec::new("dgn1", 2, keys(&[ActionKind::Key1, ActionKind::Key2]))
                .unwrap()
                .non_benchmark(),
            span,
        }
    }

    pub fn span(&self) -> u32 {
        self.span
    }
}

impl Default for Ruin {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Ruin {
    fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    fn reset_state(&self, level: u32) -> Box<dyn LevelState> {
        match level {
            1 => Box::new(Walk { pos: 1, span: 2 }),
            _ => Box::new(Walk { pos: 1, span: self.span }),
        }
    }
}

#[derive(Debug, Clone)]
struct Walk {
    pos: u32,
    span: u32,
}

impl LevelState for Walk {
    fn step(&mut self, action: Action, _rng: &mut EnvRng) -> StepOutcome {
        match action {
            Action::Key1 => self.pos -= 1,
            Action::Key2 => self.pos += 1,
            _ => return StepOutcome::unchanged(),
        }
        let event = if self.pos == 0 {
            LevelEvent::Lost
        } else if self.pos == self.span {
            LevelEvent::Won
        } else {
            LevelEvent::None
        };
        StepOutcome::changed().with_event(event)
    }

    fn render(&self, frame: &mut Frame) {
        frame.as_bytes_mut().fill(0);
        let p = self.pos as usize;
        frame.set(p % GRID_SIZE, (p / GRID_SIZE) % GRID_SIZE, 4);
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.pos.to_le_bytes());
    }

    fn is_won(&self) -> bool {
        self.pos == self.span
    }

    fn clone_box(&self) -> Box<dyn LevelState> {
        Box::new(self.clone())
    }
}

/// A registry holding `dgn1` with a win and a loss recording, ready to be
/// qualified. It must fail: level 2 is won by chance once in `span` tries.
pub fn degenerate_registry() -> Registry {
    let env: Arc<dyn Environment> = Arc::new(Ruin::new());
    let mut win = vec![Action::Key2];
    win.extend(std::iter::repeat_n(Action::Key2, Ruin::DEFAULT_SPAN as usize - 1));
    let loss = [Action::Key2, Action::Key1];
    let recordings = [&win[..], &loss[..]]
        .iter()
        .map(|actions| record_actions(env.clone(), 0, Source::Authored, "author", actions).expect("scripted run"))
        .collect();
    let mut registry = Registry::new();
    registry.register(env);
    registry.set_recordings("dgn1", recordings).expect("registered");
    registry
}

/// Wraps an environment with Key3 and Key4 swapped. Registered under the
/// wrapped game id, it stands in for a build whose mechanics regressed.
pub struct Mirrored {
    inner: Arc<dyn Environment>,
}

impl Mirrored {
    pub fn new(inner: Arc<dyn Environment>) -> Self {
        Self { inner }
    }
}

impl Environment for Mirrored {
    fn spec(&self) -> &EnvironmentSpec {
        self.inner.spec()
    }

    fn reset_state(&self, level: u32) -> Box<dyn LevelState> {
        Box::new(MirroredState(self.inner.reset_state(level)))
    }
}

#[derive(Debug, Clone)]
struct MirroredState(Box<dyn LevelState>);

impl LevelState for MirroredState {
    fn step(&mut self, action: Action, rng: &mut EnvRng) -> StepOutcome {
        let action = match action {
            Action::Key3 => Action::Key4,
            Action::Key4 => Action::Key3,
            other => other,
        };
        self.0.step(action, rng)
    }

    fn render(&self, frame: &mut Frame) {
        self.0.render(frame)
    }

    fn encode(&self, out: &mut Vec<u8>) {
        self.0.encode(out)
    }

    fn is_won(&self) -> bool {
        self.0.is_won()
    }

    fn select_classes(&self) -> Vec<SelectClass> {
        self.0.select_classes()
    }

    fn clone_box(&self) -> Box<dyn LevelState> {
        Box::new(self.clone())
    }
}
