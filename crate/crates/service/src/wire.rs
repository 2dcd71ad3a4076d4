//! JSON payloads of the HTTP API.
//!
//! Frames travel as row-major `64 x 64` arrays of integers `0..=15`; a frame
//! sequence is an array of frames, the last one being the settled state.
//! Actions are written as their tokens: `KEY1`..`KEY5`, `UNDO`, `RESET`, and
//! `SELECT` with `x` and `y` fields (or the `SELECT:x,y` token).

use gridbench::scoring::EnvironmentScorecard;
use gridbench::{Action, ActionKind, EnvironmentSpec, FrameSequence, Session};
use serde::{Deserialize, Serialize};

pub type WireFrame = Vec<Vec<u8>>;

pub fn frames_to_wire(frames: &FrameSequence) -> Vec<WireFrame> {
    frames.frames().iter().map(|f| f.rows().map(<[u8]>::to_vec).collect()).collect()
}

/// `POST /sessions`
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OpenRequest {
    pub game_id: String,
    /// Generated when absent and returned in the response.
    #[serde(default)]
    pub seed: Option<u64>,
    /// `human` (default) or `agent`; stored in the session recording.
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default)]
    pub actor: Option<String>,
}

/// `POST /sessions/{token}/actions`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionRequest {
    pub action: String,
    #[serde(default)]
    pub x: Option<u32>,
    #[serde(default)]
    pub y: Option<u32>,
}

impl ActionRequest {
    pub fn key(action: Action) -> Self {
        match action {
            Action::Select { x, y } => Self {
                action: "SELECT".into(),
                x: Some(x as u32),
                y: Some(y as u32),
            },
            other => Self {
                action: other.to_string(),
                x: None,
                y: None,
            },
        }
    }

    pub fn parse(&self) -> Result<Action, String> {
        if self.action.contains(':') {
            return self.action.parse().map_err(|e| format!("{e}"));
        }
        let kind: ActionKind = self.action.parse().map_err(|e| format!("{e}"))?;
        match (kind, self.x, self.y) {
            (ActionKind::Select, Some(x), Some(y)) => Action::select(x, y).map_err(|e| e.to_string()),
            (ActionKind::Select, _, _) => Err("SELECT needs x and y".into()),
            (_, None, None) => Ok(Action::from_kind(kind).expect("key action")),
            _ => Err(format!("{kind} takes no coordinates")),
        }
    }
}

/// The state of a session: returned by open and `GET .../frames`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub token: String,
    pub game_id: String,
    pub seed: u64,
    pub level: u32,
    pub level_count: u32,
    pub status: String,
    pub action_counts: Vec<u64>,
    pub available_actions: Vec<String>,
    pub state_hash: String,
    pub frames: Vec<WireFrame>,
}

impl SessionView {
    pub fn of(token: &str, session: &Session) -> Self {
        let spec = session.spec();
        Self {
            token: token.to_string(),
            game_id: spec.game_id.to_string(),
            seed: session.seed(),
            level: session.level(),
            level_count: spec.level_count,
            status: session.status().name().to_string(),
            action_counts: session.action_counts().to_vec(),
            available_actions: available_actions(spec),
            state_hash: session.state_digest().to_string(),
            frames: frames_to_wire(session.frames()),
        }
    }
}

pub fn available_actions(spec: &EnvironmentSpec) -> Vec<String> {
    ActionKind::ALL
        .into_iter()
        .filter(|k| spec.accepts(*k))
        .map(|k| k.name().to_string())
        .collect()
}

/// Response to an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionView {
    pub action: String,
    pub action_was_valid: bool,
    pub level_completed: bool,
    pub environment_completed: bool,
    pub game_over: bool,
    /// Level the action was applied to.
    pub applied_level: u32,
    pub level: u32,
    pub status: String,
    pub action_counts: Vec<u64>,
    pub state_hash: String,
    pub frames: Vec<WireFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScoreView {
    pub level: u32,
    pub h: u64,
    /// `null` when unsolved.
    pub actions: Option<u64>,
    pub score: f64,
}

/// `GET /sessions/{token}/scorecard`. Scores are present only when a
/// baseline is loaded for the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorecardView {
    pub token: String,
    pub game_id: String,
    pub status: String,
    pub levels_completed: u32,
    pub action_counts: Vec<u64>,
    pub baseline_sha256: Option<String>,
    pub levels: Option<Vec<LevelScoreView>>,
    pub score: Option<f64>,
    pub cut_off: Option<bool>,
}

impl ScorecardView {
    pub fn with_card(mut self, card: &EnvironmentScorecard) -> Self {
        self.baseline_sha256 = card.baseline_sha256.clone();
        self.levels = Some(
            card.levels
                .iter()
                .map(|l| LevelScoreView {
                    level: l.level,
                    h: l.h,
                    actions: match l.actions {
                        gridbench::scoring::LevelActions::Solved(a) => Some(a),
                        gridbench::scoring::LevelActions::Unsolved => None,
                    },
                    score: l.score,
                })
                .collect(),
        );
        self.score = Some(card.score);
        self.cut_off = Some(card.cut_off);
        self
    }
}

/// One entry of `GET /games`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameView {
    pub game_id: String,
    pub level_count: u32,
    pub tutorial_level: u32,
    pub benchmark: bool,
    pub available_actions: Vec<String>,
    pub has_baseline: bool,
}

/// `POST /recordings/frames`: frames of a recording after `index` actions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FramesRequest {
    /// Recording file text.
    pub recording: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramesView {
    pub index: usize,
    /// Level boundaries: the action indices at which a new level starts.
    pub level_starts: Vec<usize>,
    pub frames: Vec<WireFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(action: &str, x: Option<u32>, y: Option<u32>) -> ActionRequest {
        ActionRequest { action: action.into(), x, y }
    }

    #[test]
    fn action_parsing() {
        assert_eq!(req("KEY1", None, None).parse(), Ok(Action::Key1));
        assert_eq!(req("undo", None, None).parse(), Ok(Action::Undo));
        assert_eq!(req("SELECT", Some(3), Some(3)).parse(), Ok(Action::Select { x: 3, y: 3 }));
        assert_eq!(req("SELECT:10,20", None, None).parse(), Ok(Action::Select { x: 10, y: 20 }));
        assert!(req("SELECT", Some(64), Some(0)).parse().is_err());
        assert!(req("SELECT", None, None).parse().is_err());
        assert!(req("KEY1", Some(1), Some(1)).parse().is_err());
        assert!(req("JUMP", None, None).parse().is_err());
        for a in [Action::Key5, Action::Select { x: 63, y: 0 }] {
            assert_eq!(ActionRequest::key(a).parse(), Ok(a));
        }
    }
}
