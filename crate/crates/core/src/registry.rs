//! Environment registry: game id to definition plus committed recordings.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::env::{Environment, EnvironmentSpec, GameId};
use crate::envs;
use crate::recording::Recording;
use crate::session::{EngineError, Session};

#[derive(Clone)]
struct Entry {
    env: Arc<dyn Environment>,
    recordings: Vec<Recording>,
}

/// Read-only after startup; clone freely.
#[derive(Clone, Default)]
pub struct Registry {
    entries: BTreeMap<GameId, Entry>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The built-in environments with their committed recordings.
    pub fn builtin() -> Self {
        let mut registry = Self::new();
        envs::register_builtin_environments(&mut registry);
        registry
    }

    /// Registers `env`, replacing any environment with the same id. Existing
    /// recordings for the id are kept.
    pub fn register(&mut self, env: Arc<dyn Environment>) -> &mut Self {
        let id = env.spec().game_id;
        let recordings = self.entries.remove(&id).map(|e| e.recordings).unwrap_or_default();
        self.entries.insert(id, Entry { env, recordings });
        self
    }

    /// Replaces the recordings attached to a registered environment.
    pub fn set_recordings(&mut self, game_id: &str, recordings: Vec<Recording>) -> Result<(), EngineError> {
        let id = GameId::new(game_id).map_err(|_| EngineError::UnknownGameId(game_id.to_string()))?;
        let entry = self
            .entries
            .get_mut(&id)
            .ok_or_else(|| EngineError::UnknownGameId(game_id.to_string()))?;
        entry.recordings = recordings;
        Ok(())
    }

    fn entry(&self, game_id: &str) -> Result<&Entry, EngineError> {
        GameId::new(game_id)
            .ok()
            .and_then(|id| self.entries.get(&id))
            .ok_or_else(|| EngineError::UnknownGameId(game_id.to_string()))
    }

    pub fn get(&self, game_id: &str) -> Result<Arc<dyn Environment>, EngineError> {
        self.entry(game_id).map(|e| e.env.clone())
    }

    pub fn recordings(&self, game_id: &str) -> Result<&[Recording], EngineError> {
        self.entry(game_id).map(|e| e.recordings.as_slice())
    }

    pub fn specs(&self) -> Vec<EnvironmentSpec> {
        self.entries.values().map(|e| e.env.spec().clone()).collect()
    }

    pub fn game_ids(&self) -> Vec<String> {
        self.entries.keys().map(|id| id.to_string()).collect()
    }

    pub fn open(&self, game_id: &str, seed: u64) -> Result<Session, EngineError> {
        Ok(Session::open(self.get(game_id)?, seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_ids_are_errors() {
        let r = Registry::builtin();
        assert_eq!(r.open("zzzz", 0).unwrap_err(), EngineError::UnknownGameId("zzzz".into()));
        assert!(r.get("not-an-id").is_err());
    }

    #[test]
    fn builtin_ids() {
        assert_eq!(Registry::builtin().game_ids(), vec!["smp1", "smp2", "tiny"]);
    }
}
