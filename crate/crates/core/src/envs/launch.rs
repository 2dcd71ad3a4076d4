//! `smp2`: knock out every target with a limited number of shots.
//!
//! Keys 1 and 2 slide the launcher along the bottom row, key 3 cycles the
//! launch strength, key 4 cycles the horizontal speed and direction, and
//! key 5 fires. A shot rises, slows and falls under gravity, bounces off
//! side walls and ceilings, and stops at the first target it meets or when
//! it lands. Armored targets need two hits. Running out of shots with targets
//! left ends the game. Each flight is shown as an animation.

use crate::action::{Action, ActionKind, ActionSet};
use crate::env::{EnvRng, Environment, EnvironmentSpec, LevelEvent, LevelState, SpecError, StepOutcome};
use crate::frame::Frame;

use super::{parse_board, Layout};

/// Horizontal speeds selectable with key 4, in cycle order.
const SPEEDS: [i32; 4] = [1, 2, -1, -2];
/// Launch strengths selectable with key 3; the initial upward speed.
const STRENGTHS: [i32; 4] = [2, 3, 4, 5];
const MAX_FALL: i32 = 3;
const MAX_TICKS: usize = 32;

struct LevelDef {
    board: &'static [&'static str],
    shots: u8,
}

/// A custom launch level. The board uses the same characters as the
/// built-in levels; the launcher starts on the second-to-last row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaunchLevel {
    pub board: Vec<String>,
    pub shots: u8,
}

// '#' wall, 'T' target, 'A' armored target, 'L' launcher start (bottom
// playable row), ' ' open air.
const LEVELS: [LevelDef; 6] = [
    LevelDef {
        shots: 3,
        board: &[
            "################",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#       T      #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#      L       #",
            "################",
        ],
    },
    LevelDef {
        shots: 8,
        board: &[
            "################",
            "#A             #",
            "##  A  A       #",
            "#      #       #",
            "#              #",
            "#              #",
            "#            A #",
            "#           ## #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#      L       #",
            "################",
        ],
    },
    LevelDef {
        shots: 10,
        board: &[
            "################",
            "#            A #",
            "#   ####       #",
            "#   A  #   A   #",
            "#          ##  #",
            "#              #",
            "#A             #",
            "##             #",
            "#        ###   #",
            "#        A     #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#  L           #",
            "################",
        ],
    },
    LevelDef {
        shots: 8,
        board: &[
            "################",
            "#A            A#",
            "##            ##",
            "#              #",
            "#    #    #    #",
            "#    A    A    #",
            "#              #",
            "#              #",
            "#      ##      #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#       L      #",
            "################",
        ],
    },
    LevelDef {
        shots: 8,
        board: &[
            "################",
            "#   A      #   #",
            "#   #      A   #",
            "#          #   #",
            "#              #",
            "#  A           #",
            "#  ##      A   #",
            "#         ###  #",
            "#              #",
            "#              #",
            "#              #",
            "#              #",
            "#   ###        #",
            "#  #           #",
            "#       L      #",
            "################",
        ],
    },
    LevelDef {
        shots: 8,
        board: &[
            "################",
            "#T   #    #   T#",
            "#    # A  #  ###",
            "#    #    #    #",
            "#              #",
            "#       #      #",
            "#   T   A      #",
            "#  ###         #",
            "#           T  #",
            "#          ### #",
            "#              #",
            "#              #",
            "#              #",
            "#     #   #    #",
            "#   L          #",
            "################",
        ],
    },
];

const AIR: u8 = 0;
const WALL: u8 = 5;
const TARGET: u8 = 7;
const ARMOR: u8 = 13;
const LAUNCHER: u8 = 1;
const AIM: u8 = 8;
const BALL: u8 = 10;
const PIP: u8 = 4;

#[derive(Debug)]
pub struct Launch {
    spec: EnvironmentSpec,
    levels: Vec<LaunchLevel>,
}

impl Launch {
    pub fn new() -> Self {
        let levels = LEVELS
            .iter()
            .map(|d| LaunchLevel {
                board: d.board.iter().map(|r| r.to_string()).collect(),
                shots: d.shots,
            })
            .collect();
        Self::with_levels("smp2", levels).expect("built-in levels are valid")
    }

    /// A launch game over custom levels. Level 1 is the tutorial.
    pub fn with_levels(game_id: &str, levels: Vec<LaunchLevel>) -> Result<Self, SpecError> {
        for (i, def) in levels.iter().enumerate() {
            LaunchState::parse(def).map_err(|reason| SpecError::BadLevel {
                level: i as u32 + 1,
                reason,
            })?;
        }
        let actions = ActionSet::of(&[
            ActionKind::Key1,
            ActionKind::Key2,
            ActionKind::Key3,
            ActionKind::Key4,
            ActionKind::Key5,
        ]);
        Ok(Self {
            spec: EnvironmentSpec::new(game_id, levels.len() as u32, actions)?,
            levels,
        })
    }
}

impl Default for Launch {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Launch {
    fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    fn reset_state(&self, level: u32) -> Box<dyn LevelState> {
        Box::new(LaunchState::parse(&self.levels[level as usize - 1]).expect("validated level"))
    }

    fn mechanics(&self, level: u32) -> Vec<&'static str> {
        let mut tags = vec!["gravity", "bounce", "ammo"];
        if level == 1 {
            tags.insert(0, "tutorial");
        }
        if self.levels[level as usize - 1].board.iter().any(|r| r.contains('A')) {
            tags.push("armor");
        }
        tags
    }
}

#[derive(Debug, Clone)]
struct LaunchState {
    w: usize,
    h: usize,
    walls: Vec<bool>,
    /// Target cells and remaining hit points.
    targets: Vec<(usize, u8)>,
    launcher: usize,
    strength: u8,
    speed: u8,
    shots: u8,
    layout: Layout,
}

impl LaunchState {
    fn parse(def: &LaunchLevel) -> Result<Self, String> {
        let (w, h, raw) = parse_board(&def.board, b'#');
        if w > 64 || h > 64 {
            return Err(format!("{w}x{h} board does not fit the frame"));
        }
        if let Some(b) = raw.iter().find(|b| !b" #TAL".contains(b)) {
            return Err(format!("unknown tile {:?}", *b as char));
        }
        let walls = raw.iter().map(|&b| b == b'#').collect();
        let targets = raw
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| match b {
                b'T' => Some((i, 1)),
                b'A' => Some((i, 2)),
                _ => None,
            })
            .collect::<Vec<_>>();
        if targets.is_empty() {
            return Err("no targets".into());
        }
        if def.shots == 0 {
            return Err("no shots".into());
        }
        let start = raw.iter().position(|&b| b == b'L').ok_or("no launcher")?;
        if h < 3 || start / w != h - 2 {
            return Err("the launcher must start on the second-to-last row".into());
        }
        Ok(Self {
            w,
            h,
            walls,
            targets,
            launcher: start % w,
            strength: 0,
            speed: 0,
            shots: def.shots,
            layout: Layout::fit(w, h),
        })
    }

    fn row(&self) -> usize {
        self.h - 2
    }

    fn wall(&self, x: i32, y: i32) -> bool {
        if x < 0 || y < 0 || x as usize >= self.w || y as usize >= self.h {
            return true;
        }
        self.walls[y as usize * self.w + x as usize]
    }

    fn target_at(&self, x: i32, y: i32) -> Option<usize> {
        if x < 0 || y < 0 {
            return None;
        }
        let i = y as usize * self.w + x as usize;
        self.targets.iter().position(|&(c, hp)| c == i && hp > 0)
    }

    fn remaining(&self) -> usize {
        self.targets.iter().filter(|(_, hp)| *hp > 0).count()
    }

    /// Flies one shot, returning the ball position after every tick.
    fn fly(&mut self) -> Vec<(i32, i32)> {
        let mut x = self.launcher as i32;
        let mut y = self.row() as i32 - 1;
        let mut vx = SPEEDS[self.speed as usize];
        let mut vy = -STRENGTHS[self.strength as usize];
        let mut path = Vec::new();
        if self.wall(x, y) {
            return path;
        }
        'flight: for _ in 0..MAX_TICKS {
            for _ in 0..vx.abs() {
                let nx = x + vx.signum();
                if let Some(t) = self.target_at(nx, y) {
                    self.targets[t].1 -= 1;
                    break 'flight;
                }
                if self.wall(nx, y) {
                    vx = -vx;
                    break;
                }
                x = nx;
            }
            for _ in 0..vy.abs() {
                let ny = y + vy.signum();
                if let Some(t) = self.target_at(x, ny) {
                    self.targets[t].1 -= 1;
                    path.push((x, y));
                    break 'flight;
                }
                if self.wall(x, ny) {
                    if vy < 0 {
                        vy = 0;
                        break;
                    }
                    path.push((x, y));
                    break 'flight;
                }
                y = ny;
                if y as usize >= self.row() {
                    path.push((x, y));
                    break 'flight;
                }
            }
            vy = (vy + 1).min(MAX_FALL);
            path.push((x, y));
        }
        path
    }

    fn draw_ball(&self, frame: &mut Frame, x: i32, y: i32) {
        self.layout.inset(frame, x as usize, y as usize, 1, BALL);
    }
}

impl LevelState for LaunchState {
    fn step(&mut self, action: Action, _rng: &mut EnvRng) -> StepOutcome {
        let row = self.row();
        match action {
            Action::Key1 | Action::Key2 => {
                let next = if action == Action::Key1 {
                    self.launcher.wrapping_sub(1)
                } else {
                    self.launcher + 1
                };
                if next >= self.w || self.walls[row * self.w + next] {
                    return StepOutcome::unchanged();
                }
                self.launcher = next;
                StepOutcome::changed()
            }
            Action::Key3 => {
                self.strength = (self.strength + 1) % STRENGTHS.len() as u8;
                StepOutcome::changed()
            }
            Action::Key4 => {
                self.speed = (self.speed + 1) % SPEEDS.len() as u8;
                StepOutcome::changed()
            }
            Action::Key5 => {
                let path = self.fly();
                self.shots -= 1;
                let mut animation = Vec::with_capacity(path.len());
                let mut base = Frame::filled(0);
                self.render(&mut base);
                for &(x, y) in &path {
                    let mut f = base.clone();
                    self.draw_ball(&mut f, x, y);
                    animation.push(f);
                }
                let event = if self.remaining() == 0 {
                    LevelEvent::Won
                } else if self.shots == 0 {
                    LevelEvent::Lost
                } else {
                    LevelEvent::None
                };
                StepOutcome::changed()
                    .with_event(event)
                    .with_animation(animation)
            }
            _ => StepOutcome::unchanged(),
        }
    }

    fn render(&self, frame: &mut Frame) {
        frame.as_bytes_mut().fill(AIR);
        let l = &self.layout;
        for y in 0..self.h {
            for x in 0..self.w {
                if self.walls[y * self.w + x] {
                    l.fill(frame, x, y, WALL);
                }
            }
        }
        for &(i, hp) in &self.targets {
            match hp {
                0 => {}
                1 => l.fill(frame, i % self.w, i / self.w, TARGET),
                _ => l.fill(frame, i % self.w, i / self.w, ARMOR),
            }
        }
        let row = self.row();
        l.fill(frame, self.launcher, row, LAUNCHER);
        // Aim marker: one pixel whose offset shows speed and strength.
        let (cx, cy) = l.origin(self.launcher, row);
        let ax = cx as i32 + l.cell as i32 / 2 + SPEEDS[self.speed as usize] * 2;
        let ay = cy as i32 - 1 - STRENGTHS[self.strength as usize] * 2;
        if (0..64).contains(&ax) && (0..64).contains(&ay) {
            frame.set(ax as usize, ay as usize, AIM);
        }
        for pip in 0..self.shots as usize {
            frame.fill_rect(l.ox + 1 + pip * 3, l.oy + 1, 2, 2, PIP);
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.launcher as u8);
        out.push(self.strength);
        out.push(self.speed);
        out.push(self.shots);
        out.extend(self.targets.iter().map(|(_, hp)| *hp));
    }

    fn is_won(&self) -> bool {
        self.remaining() == 0
    }

    fn clone_box(&self) -> Box<dyn LevelState> {
        Box::new(self.clone())
    }
}
