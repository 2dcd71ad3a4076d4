//! `smp1`: push crates onto the marked cells.
//!
//! Keys 1-4 walk up, down, left, right; walking into a crate pushes it if the
//! cell behind it is free. Walking into an open pit ends the game, but a
//! crate pushed into a pit fills it and becomes floor. Selecting a switch
//! cell opens every closed gate and closes every open one, unless a gate
//! that would close is occupied.

use crate::action::{Action, ActionKind, ActionSet};
use crate::env::{
    EnvRng, Environment, EnvironmentSpec, LevelEvent, LevelState, SelectClass, SpecError, StepOutcome,
};
use crate::frame::{Frame, CELL_COUNT};

use super::{parse_board, Layout};

// '#' wall, '.' mark, '$' crate, '*' crate on mark, '@' player, '+' player on
// mark, '^' pit, 'o' switch, 'G' closed gate, 'g' open gate.
pub(crate) const LEVELS: [&[&str]; 6] = [
    &[
        "#######", //
        "#@ $ .#", //
        "#######",
    ],
    &[
        "#########", //
        "#^^^^^^^#", //
        "#^  .  ^#", //
        "#^ $ $ ^#", //
        "#^  @ .^#", //
        "#^^^^^^^#", //
        "#########",
    ],
    &[
        "##########", //
        "#^^^^^^^^#", //
        "#^ . ^ .^#", //
        "#^ $   $^#", //
        "#^  ^@  ^#", //
        "#^ $   .^#", //
        "#^^^^^^^^#", //
        "##########",
    ],
    &[
        "###########", //
        "#^^^^^^^^^#", //
        "#^  ^  . ^#", //
        "#^ $ G $ ^#", //
        "#^@ o#  .^#", //
        "#^^^^^^^^^#", //
        "###########",
    ],
    &[
        "#########", //
        "#^^^^^^^#", //
        "#^. ^ .^#", //
        "#^ $ $ ^#", //
        "#^ g@G ^#", //
        "#^o $ .^#", //
        "#^^^^^^^#", //
        "#########",
    ],
    &[
        "##########", //
        "#^^^^^^^^#", //
        "#^.  ^ .^#", //
        "#^ $ G $^#", //
        "#^ g@ ^ ^#", //
        "#^o $ . ^#", //
        "#^^^^^^^^#", //
        "##########",
    ],
];

const FLOOR: u8 = 0;
const WALL: u8 = 5;
const MARK: u8 = 3;
const CRATE: u8 = 14;
const PLAYER: u8 = 4;
const PIT: u8 = 9;
const FILLED: u8 = 11;
const SWITCH: u8 = 6;
const GATE: u8 = 12;

#[derive(Debug)]
pub struct Push {
    spec: EnvironmentSpec,
    levels: Vec<Vec<String>>,
}

impl Push {
    pub fn new() -> Self {
        let levels = LEVELS.iter().map(|rows| rows.iter().map(|r| r.to_string()).collect()).collect();
        Self::with_levels("smp1", levels).expect("built-in levels are valid")
    }

    /// A push game over custom boards, using the same tile characters as
    /// the built-in levels. Level 1 is the tutorial.
    pub fn with_levels(game_id: &str, levels: Vec<Vec<String>>) -> Result<Self, SpecError> {
        for (i, rows) in levels.iter().enumerate() {
            let bad = |reason: String| SpecError::BadLevel {
                level: i as u32 + 1,
                reason,
            };
            let st = PushState::parse(rows).map_err(bad)?;
            if st.is_won() {
                return Err(bad("board starts solved".into()));
            }
        }
        let actions = ActionSet::of(&[
            ActionKind::Key1,
            ActionKind::Key2,
            ActionKind::Key3,
            ActionKind::Key4,
            ActionKind::Undo,
            ActionKind::Select,
        ]);
        Ok(Self {
            spec: EnvironmentSpec::new(game_id, levels.len() as u32, actions)?,
            levels,
        })
    }
}

impl Default for Push {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Push {
    fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    fn reset_state(&self, level: u32) -> Box<dyn LevelState> {
        Box::new(PushState::parse(&self.levels[level as usize - 1]).expect("validated board"))
    }

    fn mechanics(&self, level: u32) -> Vec<&'static str> {
        let mut tags = vec!["push", "marks"];
        if level == 1 {
            tags.insert(0, "tutorial");
        }
        if level >= 2 {
            tags.push("pits");
        }
        if self.levels[level as usize - 1].iter().any(|r| r.contains('o')) {
            tags.push("switches");
        }
        tags
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tile {
    Floor,
    Wall,
    Pit,
    Switch,
    Gate,
}

#[derive(Debug, Clone)]
struct PushState {
    w: usize,
    h: usize,
    tiles: Vec<Tile>,
    marks: Vec<bool>,
    crates: Vec<bool>,
    filled: Vec<bool>,
    player: usize,
    /// Gates that start open.
    open_at_start: Vec<bool>,
    /// Whether the switches have been used an odd number of times.
    flipped: bool,
    layout: Layout,
}

impl PushState {
    fn parse<S: AsRef<str>>(rows: &[S]) -> Result<Self, String> {
        let (w, h, raw) = parse_board(rows, b'#');
        if w > 64 || h > 64 {
            return Err(format!("{w}x{h} board does not fit the frame"));
        }
        if w * h > 256 {
            return Err(format!("{w}x{h} board is larger than 256 cells"));
        }
        let mut player = None;
        let mut open_at_start = vec![false; raw.len()];
        let mut tiles = Vec::with_capacity(raw.len());
        let mut marks = vec![false; raw.len()];
        let mut crates = vec![false; raw.len()];
        for (i, b) in raw.iter().enumerate() {
            let tile = match b {
                b'#' => Tile::Wall,
                b'^' => Tile::Pit,
                b'o' => Tile::Switch,
                b'G' | b'g' => {
                    open_at_start[i] = *b == b'g';
                    Tile::Gate
                }
                b' ' | b'.' | b'$' | b'*' | b'@' | b'+' => Tile::Floor,
                other => return Err(format!("unknown tile {:?}", *other as char)),
            };
            marks[i] = matches!(b, b'.' | b'*' | b'+');
            crates[i] = matches!(b, b'$' | b'*');
            if matches!(b, b'@' | b'+') {
                player = Some(i);
            }
            tiles.push(tile);
        }
        Ok(Self {
            w,
            h,
            filled: vec![false; raw.len()],
            tiles,
            marks,
            crates,
            player: player.ok_or("no player")?,
            open_at_start,
            flipped: false,
            layout: Layout::fit(w, h),
        })
    }

    fn neighbor(&self, i: usize, action: Action) -> Option<usize> {
        let (x, y) = (i % self.w, i / self.w);
        let (nx, ny) = match action {
            Action::Key1 => (x, y.checked_sub(1)?),
            Action::Key2 => (x, y + 1),
            Action::Key3 => (x.checked_sub(1)?, y),
            Action::Key4 => (x + 1, y),
            _ => return None,
        };
        (nx < self.w && ny < self.h).then_some(ny * self.w + nx)
    }

    fn blocks(&self, i: usize) -> bool {
        match self.tiles[i] {
            Tile::Wall => true,
            Tile::Gate => !self.gate_open(i),
            _ => false,
        }
    }

    fn gate_open(&self, i: usize) -> bool {
        self.open_at_start[i] != self.flipped
    }

    fn open_pit(&self, i: usize) -> bool {
        self.tiles[i] == Tile::Pit && !self.filled[i]
    }

    fn walk(&mut self, action: Action) -> StepOutcome {
        let Some(next) = self.neighbor(self.player, action) else {
            return StepOutcome::unchanged();
        };
        if self.blocks(next) {
            return StepOutcome::unchanged();
        }
        if self.crates[next] {
            let Some(beyond) = self.neighbor(next, action) else {
                return StepOutcome::unchanged();
            };
            if self.blocks(beyond) || self.crates[beyond] {
                return StepOutcome::unchanged();
            }
            self.crates[next] = false;
            if self.open_pit(beyond) {
                self.filled[beyond] = true;
            } else {
                self.crates[beyond] = true;
            }
            self.player = next;
            if self.is_won() {
                return StepOutcome::changed().with_event(LevelEvent::Won);
            }
            return StepOutcome::changed();
        }
        self.player = next;
        if self.open_pit(next) {
            return StepOutcome::changed().with_event(LevelEvent::Lost);
        }
        StepOutcome::changed()
    }

    fn toggle(&mut self, x: u8, y: u8) -> StepOutcome {
        let Some((tx, ty)) = self.layout.tile_at(x as usize, y as usize, self.w, self.h) else {
            return StepOutcome::unchanged();
        };
        if self.tiles[ty * self.w + tx] != Tile::Switch {
            return StepOutcome::unchanged();
        }
        let blocked = (0..self.tiles.len()).any(|i| {
            self.tiles[i] == Tile::Gate && self.gate_open(i) && (self.crates[i] || self.player == i)
        });
        if blocked {
            return StepOutcome::unchanged();
        }
        self.flipped = !self.flipped;
        StepOutcome::changed()
    }
}

impl LevelState for PushState {
    fn step(&mut self, action: Action, _rng: &mut EnvRng) -> StepOutcome {
        match action {
            Action::Select { x, y } => self.toggle(x, y),
            _ => self.walk(action),
        }
    }

    fn render(&self, frame: &mut Frame) {
        frame.as_bytes_mut().fill(FLOOR);
        let l = &self.layout;
        let small = (l.cell / 3).max(1);
        for y in 0..self.h {
            for x in 0..self.w {
                let i = y * self.w + x;
                match self.tiles[i] {
                    Tile::Wall => l.fill(frame, x, y, WALL),
                    Tile::Pit if self.filled[i] => l.fill(frame, x, y, FILLED),
                    Tile::Pit => l.fill(frame, x, y, PIT),
                    Tile::Switch => l.inset(frame, x, y, 1, SWITCH),
                    Tile::Gate if self.gate_open(i) => l.inset(frame, x, y, small, GATE),
                    Tile::Gate => l.fill(frame, x, y, GATE),
                    Tile::Floor => {}
                }
                if self.crates[i] {
                    l.fill(frame, x, y, CRATE);
                    if self.marks[i] {
                        l.inset(frame, x, y, small, MARK);
                    }
                } else if self.marks[i] {
                    l.inset(frame, x, y, 1, MARK);
                }
            }
        }
        let (px, py) = (self.player % self.w, self.player / self.w);
        l.fill(frame, px, py, PLAYER);
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.player as u8);
        out.push(self.flipped as u8);
        for (i, _) in self.crates.iter().enumerate().filter(|(_, c)| **c) {
            out.push(i as u8);
        }
        out.push(0xff);
        for (i, _) in self.filled.iter().enumerate().filter(|(_, f)| **f) {
            out.push(i as u8);
        }
    }

    fn is_won(&self) -> bool {
        self.marks
            .iter()
            .zip(&self.crates)
            .all(|(mark, krate)| !mark || *krate)
    }

    fn select_classes(&self) -> Vec<SelectClass> {
        let area = (self.layout.cell * self.layout.cell) as u32;
        let mut classes: Vec<SelectClass> = (0..self.tiles.len())
            .filter(|&i| self.tiles[i] == Tile::Switch)
            .map(|i| {
                let (x, y) = self.layout.origin(i % self.w, i / self.w);
                SelectClass { x, y, weight: area }
            })
            .collect();
        let used: u32 = classes.iter().map(|c| c.weight).sum();
        // Pixel (0, 0) is always a wall or margin cell.
        classes.push(SelectClass {
            x: 0,
            y: 0,
            weight: CELL_COUNT as u32 - used,
        });
        classes
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

    fn open(level: u32) -> Session {
        Session::open_at_level(Arc::new(Push::new()), 0, level).unwrap()
    }

    #[test]
    fn tutorial_is_three_pushes() {
        let mut s = open(1);
        s.step(Action::Key4).unwrap();
        s.step(Action::Key4).unwrap();
        let t = s.step(Action::Key4).unwrap();
        assert!(t.level_completed);
        assert_eq!(s.level(), 2);
    }

    #[test]
    fn no_level_starts_won_and_boards_fit() {
        let env = Push::new();
        for level in 1..=6 {
            let st = env.reset_state(level);
            assert!(!st.is_won(), "level {level}");
            let mut f = Frame::filled(0);
            st.render(&mut f);
            f.validate().unwrap();
        }
    }

    #[test]
    fn crates_fill_pits() {
        let mut st = PushState::parse(&["#####", "#@$^#", "#####"]).unwrap();
        let mut rng = <EnvRng as rand::SeedableRng>::seed_from_u64(0);
        assert!(st.step(Action::Key4, &mut rng).changed);
        assert!(st.filled[8]);
        assert!(!st.crates.iter().any(|c| *c));
        // The filled pit is now safe to walk on.
        let out = st.step(Action::Key4, &mut rng);
        assert_eq!(out.event, LevelEvent::None);
    }

    #[test]
    fn walking_into_pit_loses() {
        let mut st = PushState::parse(&["####", "#@^#", "####"]).unwrap();
        let mut rng = <EnvRng as rand::SeedableRng>::seed_from_u64(0);
        assert_eq!(st.step(Action::Key4, &mut rng).event, LevelEvent::Lost);
    }

    #[test]
    fn switch_toggles_gates_unless_blocked() {
        let mut st = PushState::parse(&["######", "#@Go #", "######"]).unwrap();
        let mut rng = <EnvRng as rand::SeedableRng>::seed_from_u64(0);
        assert!(!st.step(Action::Key4, &mut rng).changed);
        let (sx, sy) = st.layout.origin(3, 1);
        assert!(st.step(Action::Select { x: sx + 1, y: sy + 1 }, &mut rng).changed);
        assert!(st.step(Action::Key4, &mut rng).changed);
        // Player stands in the gate: it cannot close.
        assert!(!st.step(Action::Select { x: sx, y: sy }, &mut rng).changed);
        // A non-switch cell does nothing.
        assert!(!st.step(Action::Select { x: 0, y: 0 }, &mut rng).changed);
    }

    #[test]
    fn custom_levels_are_checked() {
        let board = |rows: &[&str]| rows.iter().map(|r| r.to_string()).collect::<Vec<_>>();
        let env = Push::with_levels("abcd", vec![board(&["#####", "#@$.#", "#####"])]).unwrap();
        assert_eq!(env.spec().level_count, 1);
        assert!(Push::with_levels("abcd", vec![board(&["#####", "#@ *#", "#####"])]).is_err());
        assert!(Push::with_levels("abcd", vec![board(&["#####", "# $.#", "#####"])]).is_err());
        assert!(Push::with_levels("abcd", vec![board(&["#####", "#@$x#", "#####"])]).is_err());
    }
}
