use std::sync::Arc;

use gridbench::envs::fixtures::Mirrored;
use gridbench::envs::Push;
use gridbench::recording::{frames_at, replay_on, MismatchReason, ReplayError};
use gridbench::{replay, Outcome, Recording, Registry, ReplayVerdict, Session, StateDigest};

#[test]
fn committed_recordings_replay_identically() {
    let registry = Registry::builtin();
    for game in registry.game_ids() {
        let recs = registry.recordings(&game).unwrap();
        assert_eq!(recs[0].outcome, Outcome::Win, "{game}");
        assert_eq!(recs[1].outcome, Outcome::Loss, "{game}");
        for rec in recs {
            for _ in 0..10 {
                assert_eq!(replay(&registry, rec).unwrap(), ReplayVerdict::Identical);
            }
        }
    }
}

#[test]
fn every_prefix_reaches_its_stored_digest() {
    let registry = Registry::builtin();
    let rec = &registry.recordings("smp1").unwrap()[0];
    let mut session = registry.open("smp1", rec.seed).unwrap();
    for stored in &rec.actions {
        let t = session.step(stored.action).unwrap();
        assert_eq!(t.state_hash, stored.digest);
        assert_eq!(t.level, stored.level);
    }
    assert_eq!(session.action_counts(), rec.level_counts().as_slice());
}

#[test]
fn tampering_is_located() {
    let registry = Registry::builtin();
    let mut rec = registry.recordings("smp2").unwrap()[0].clone();
    rec.actions[17].digest = StateDigest(rec.actions[17].digest.0 ^ 0xff);
    assert_eq!(
        replay(&registry, &rec).unwrap(),
        ReplayVerdict::Mismatch { index: 17, reason: MismatchReason::Digest }
    );
    let mut rec = registry.recordings("smp2").unwrap()[0].clone();
    rec.outcome = Outcome::Loss;
    assert_eq!(
        replay(&registry, &rec).unwrap(),
        ReplayVerdict::Mismatch { index: rec.len(), reason: MismatchReason::Outcome }
    );
}

#[test]
fn a_changed_mechanic_is_caught() {
    let registry = Registry::builtin();
    let rec = &registry.recordings("smp1").unwrap()[0];
    let altered = Arc::new(Mirrored::new(Arc::new(Push::new())));
    assert!(matches!(replay_on(altered, rec), ReplayVerdict::Mismatch { .. }));
}

#[test]
fn frames_at_matches_a_fresh_session() {
    let registry = Registry::builtin();
    let rec = &registry.recordings("smp2").unwrap()[0];
    let reset = Session::open(registry.get("smp2").unwrap(), rec.seed);
    assert_eq!(&frames_at(&registry, rec, 0).unwrap(), reset.frames());
    for k in [1, 5, 20, rec.len()] {
        let mut s = Session::open(registry.get("smp2").unwrap(), rec.seed);
        for a in &rec.actions[..k] {
            s.step(a.action).unwrap();
        }
        assert_eq!(&frames_at(&registry, rec, k).unwrap(), s.frames());
    }
    assert!(matches!(
        frames_at(&registry, rec, rec.len() + 1),
        Err(ReplayError::IndexOutOfRange { .. })
    ));
}

#[test]
fn committed_files_round_trip_byte_for_byte() {
    let registry = Registry::builtin();
    for game in registry.game_ids() {
        for rec in registry.recordings(&game).unwrap() {
            let text = rec.to_text();
            assert_eq!(Recording::parse(&text).unwrap().to_text(), text);
        }
    }
}
