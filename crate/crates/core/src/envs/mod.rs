//! Built-in environments.
//!
//! * `smp1`: push crates onto marked cells; pits swallow the player but can
//!   be filled with a crate; clickable switches open and close gates.
//! * `smp2`: a launcher fires a ball that falls under gravity and bounces off
//!   walls; knock out every target with limited ammunition.
//! * `tiny`: a two-level walk-to-the-exit room, small enough to enumerate by
//!   hand. Not a benchmark environment.
//!
//! Level 1 of every environment is the tutorial level.

pub mod fixtures;
pub mod launch;
pub mod oracle;
pub mod push;
pub mod tiny;

use std::sync::Arc;

use crate::env::{Environment, EnvironmentSpec};
use crate::frame::{Frame, GRID_SIZE};
use crate::recording::Recording;
use crate::registry::Registry;
use crate::scoring::HumanBaseline;

pub use launch::{Launch, LaunchLevel};
pub use push::Push;
pub use tiny::Tiny;

/// The three built-in environments, in registry order.
pub fn builtin_environments() -> Vec<Arc<dyn Environment>> {
    vec![Arc::new(Push::new()), Arc::new(Launch::new()), Arc::new(Tiny::new())]
}

/// Registers the built-in environments and their committed recordings,
/// returning their specs.
pub fn register_builtin_environments(registry: &mut Registry) -> Vec<EnvironmentSpec> {
    builtin_environments()
        .into_iter()
        .map(|env| {
            let spec = env.spec().clone();
            let id = spec.game_id.to_string();
            registry.register(env);
            registry
                .set_recordings(&id, committed_recordings(&id))
                .expect("just registered");
            spec
        })
        .collect()
}

/// Recordings shipped with a built-in environment: the optimal playthrough
/// first, then a losing run.
pub fn committed_recordings(game_id: &str) -> Vec<Recording> {
    let texts: &[&str] = match game_id {
        "smp1" => &[include_str!("../../data/smp1-win.rec"), include_str!("../../data/smp1-loss.rec")],
        "smp2" => &[include_str!("../../data/smp2-win.rec"), include_str!("../../data/smp2-loss.rec")],
        "tiny" => &[include_str!("../../data/tiny-win.rec"), include_str!("../../data/tiny-loss.rec")],
        _ => &[],
    };
    parse_all(texts)
}

/// First-run attempts the committed baseline was extracted from.
pub fn committed_attempts(game_id: &str) -> Vec<Recording> {
    let texts: &[&str] = match game_id {
        "smp1" => &[
            include_str!("../../data/attempts/smp1-a.rec"),
            include_str!("../../data/attempts/smp1-b.rec"),
            include_str!("../../data/attempts/smp1-c.rec"),
            include_str!("../../data/attempts/smp1-d.rec"),
        ],
        "smp2" => &[
            include_str!("../../data/attempts/smp2-a.rec"),
            include_str!("../../data/attempts/smp2-b.rec"),
            include_str!("../../data/attempts/smp2-c.rec"),
            include_str!("../../data/attempts/smp2-d.rec"),
        ],
        _ => &[],
    };
    parse_all(texts)
}

/// The frozen human baseline of a benchmark environment.
pub fn committed_baseline(game_id: &str) -> Option<HumanBaseline> {
    let text = match game_id {
        "smp1" => include_str!("../../data/smp1.baseline"),
        "smp2" => include_str!("../../data/smp2.baseline"),
        _ => return None,
    };
    Some(HumanBaseline::parse(text).expect("committed baselines parse"))
}

fn parse_all(texts: &[&str]) -> Vec<Recording> {
    texts
        .iter()
        .map(|t| Recording::parse(t).expect("committed recordings parse"))
        .collect()
}

/// Placement of a `w` x `h` tile board inside the 64x64 grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub cell: usize,
    pub ox: usize,
    pub oy: usize,
}

impl Layout {
    pub fn fit(w: usize, h: usize) -> Self {
        let cell = (GRID_SIZE / w.max(h)).max(1);
        Self {
            cell,
            ox: (GRID_SIZE - cell * w) / 2,
            oy: (GRID_SIZE - cell * h) / 2,
        }
    }

    pub fn fill(&self, frame: &mut Frame, x: usize, y: usize, color: u8) {
        frame.fill_rect(self.ox + x * self.cell, self.oy + y * self.cell, self.cell, self.cell, color);
    }

    /// A filled square inset by `inset` pixels on each side.
    pub fn inset(&self, frame: &mut Frame, x: usize, y: usize, inset: usize, color: u8) {
        let size = self.cell.saturating_sub(2 * inset).max(1);
        frame.fill_rect(
            self.ox + x * self.cell + inset,
            self.oy + y * self.cell + inset,
            size,
            size,
            color,
        );
    }

    /// Tile under pixel `(px, py)`, if any.
    pub fn tile_at(&self, px: usize, py: usize, w: usize, h: usize) -> Option<(usize, usize)> {
        if px < self.ox || py < self.oy {
            return None;
        }
        let (x, y) = ((px - self.ox) / self.cell, (py - self.oy) / self.cell);
        (x < w && y < h).then_some((x, y))
    }

    /// Top-left pixel of a tile.
    pub fn origin(&self, x: usize, y: usize) -> (u8, u8) {
        ((self.ox + x * self.cell) as u8, (self.oy + y * self.cell) as u8)
    }
}

/// Parses a rectangular ASCII board, padding short rows with `pad`.
pub(crate) fn parse_board<S: AsRef<str>>(rows: &[S], pad: u8) -> (usize, usize, Vec<u8>) {
    let w = rows.iter().map(|r| r.as_ref().len()).max().unwrap_or(0);
    let h = rows.len();
    let mut tiles = vec![pad; w * h];
    for (y, row) in rows.iter().enumerate() {
        for (x, b) in row.as_ref().bytes().enumerate() {
            tiles[y * w + x] = b;
        }
    }
    (w, h, tiles)
}
