//! `tiny`: walk to the exit without falling in. Two small rooms.
//!
//! Keys 1-4 move up, down, left, right. Walking into a wall does nothing.
//! Level 2 has a cracked tile that gives way after it has been walked off
//! twice; its wear is hidden until it breaks.

use crate::action::{Action, ActionKind, ActionSet};
use crate::env::{EnvRng, Environment, EnvironmentSpec, LevelEvent, LevelState, StepOutcome};
use crate::frame::Frame;

use super::{parse_board, Layout};

const LEVELS: [&[&str]; 2] = [
    &[
        "#####", //
        "#  E#", //
        "# @ #", //
        "# X #", //
        "#####",
    ],
    &[
        "#######", //
        "#@   X#", //
        "# c#  #", //
        "#X    #", //
        "#  X E#", //
        "#######",
    ],
];

const FLOOR: u8 = 0;
const WALL: u8 = 5;
const PLAYER: u8 = 4;
const EXIT: u8 = 8;
const HOLE: u8 = 2;
const CRACKED: u8 = 14;

#[derive(Debug)]
pub struct Tiny {
    spec: EnvironmentSpec,
}

impl Tiny {
    pub fn new() -> Self {
        let actions = ActionSet::of(&[
            ActionKind::Key1,
            ActionKind::Key2,
            ActionKind::Key3,
            ActionKind::Key4,
        ]);
        let spec = EnvironmentSpec::new("tiny", LEVELS.len() as u32, actions)
            .expect("valid spec")
            .non_benchmark();
        Self { spec }
    }
}

impl Default for Tiny {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Tiny {
    fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    fn reset_state(&self, level: u32) -> Box<dyn LevelState> {
        let (w, h, tiles) = parse_board(LEVELS[level as usize - 1], b'#');
        let pos = tiles.iter().position(|&t| t == b'@').expect("player start");
        let crack = tiles.iter().position(|&t| t == b'c');
        Box::new(TinyState {
            w,
            h,
            tiles,
            player: pos,
            crack,
            wear: 0,
            layout: Layout::fit(w, h),
        })
    }

    fn mechanics(&self, level: u32) -> Vec<&'static str> {
        match level {
            1 => vec!["tutorial", "walk", "holes"],
            _ => vec!["walk", "holes", "cracked-floor"],
        }
    }
}

#[derive(Debug, Clone)]
struct TinyState {
    w: usize,
    h: usize,
    tiles: Vec<u8>,
    player: usize,
    crack: Option<usize>,
    wear: u8,
    layout: Layout,
}

impl TinyState {
    fn tile(&self, i: usize) -> u8 {
        if Some(i) == self.crack && self.wear >= 2 {
            b'X'
        } else {
            self.tiles[i]
        }
    }
}

impl LevelState for TinyState {
    fn step(&mut self, action: Action, _rng: &mut EnvRng) -> StepOutcome {
        let (x, y) = (self.player % self.w, self.player / self.w);
        let (nx, ny) = match action {
            Action::Key1 => (x, y.wrapping_sub(1)),
            Action::Key2 => (x, y + 1),
            Action::Key3 => (x.wrapping_sub(1), y),
            Action::Key4 => (x + 1, y),
            _ => return StepOutcome::unchanged(),
        };
        if nx >= self.w || ny >= self.h {
            return StepOutcome::unchanged();
        }
        let next = ny * self.w + nx;
        let target = self.tile(next);
        if target == b'#' {
            return StepOutcome::unchanged();
        }
        if Some(self.player) == self.crack {
            self.wear = (self.wear + 1).min(2);
        }
        self.player = next;
        match target {
            b'X' => StepOutcome::changed().with_event(LevelEvent::Lost),
            b'E' => StepOutcome::changed().with_event(LevelEvent::Won),
            _ => StepOutcome::changed(),
        }
    }

    fn render(&self, frame: &mut Frame) {
        frame.as_bytes_mut().fill(FLOOR);
        for y in 0..self.h {
            for x in 0..self.w {
                let color = match self.tile(y * self.w + x) {
                    b'#' => WALL,
                    b'X' => HOLE,
                    b'E' => EXIT,
                    b'c' => CRACKED,
                    _ => continue,
                };
                self.layout.fill(frame, x, y, color);
            }
        }
        let (px, py) = (self.player % self.w, self.player / self.w);
        self.layout.inset(frame, px, py, 2, PLAYER);
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.player as u8);
        out.push(self.wear);
    }

    fn is_won(&self) -> bool {
        self.tiles[self.player] == b'E'
    }

    fn clone_box(&self) -> Box<dyn LevelState> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::Session;
    use std::sync::Arc;

    #[test]
    fn cracked_tile_wear_is_hidden_until_it_breaks() {
        let env: Arc<dyn Environment> = Arc::new(Tiny::new());
        // Level 2: start (1,1); the cracked tile is (2,2), reached via (2,1).
        let mut a = Session::open_at_level(env.clone(), 0, 2).unwrap();
        let mut b = Session::open_at_level(env, 0, 2).unwrap();
        for act in [Action::Key4, Action::Key2, Action::Key1, Action::Key3] {
            a.step(act).unwrap();
        }
        // b walks the loop without touching the cracked tile.
        for act in [Action::Key4, Action::Key4, Action::Key3, Action::Key3] {
            b.step(act).unwrap();
        }
        assert_eq!(a.frames().last(), b.frames().last());
        assert_ne!(a.state_digest(), b.state_digest());
    }

    #[test]
    fn cracked_tile_breaks_on_second_departure() {
        let env: Arc<dyn Environment> = Arc::new(Tiny::new());
        let mut s = Session::open_at_level(env, 0, 2).unwrap();
        for act in [Action::Key4, Action::Key2, Action::Key1, Action::Key2, Action::Key1] {
            s.step(act).unwrap();
        }
        // Walked off twice; stepping back in falls through.
        let t = s.step(Action::Key2).unwrap();
        assert!(t.game_over);
    }
}
