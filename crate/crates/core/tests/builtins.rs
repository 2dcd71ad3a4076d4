use std::collections::BTreeSet;
use std::sync::Arc;

use gridbench::envs::register_builtin_environments;
use gridbench::validation::{run_regime, RegimeConfig};
use gridbench::{Frame, Registry};

#[test]
fn registry_contents() {
    let mut registry = Registry::new();
    let specs = register_builtin_environments(&mut registry);
    let ids: Vec<String> = specs.iter().map(|s| s.game_id.to_string()).collect();
    assert_eq!(ids, ["smp1", "smp2", "tiny"]);
    assert_eq!(specs[0].level_count, 6);
    assert_eq!(specs[1].level_count, 6);
    assert_eq!(specs[2].level_count, 2);
}

#[test]
fn reset_states_are_valid_and_unsolved() {
    let registry = Registry::builtin();
    for game in registry.game_ids() {
        let env = registry.get(&game).unwrap();
        for level in 1..=env.spec().level_count {
            let st = env.reset_state(level);
            assert!(!st.is_won(), "{game} level {level}");
            let mut f = Frame::filled(0);
            st.render(&mut f);
            f.validate().unwrap();
            assert_eq!(env.mechanics(level).contains(&"tutorial"), level == 1);
        }
    }
}

#[test]
fn benchmark_mechanics_do_not_overlap() {
    let registry = Registry::builtin();
    let tags = |game: &str| -> BTreeSet<&'static str> {
        let env = registry.get(game).unwrap();
        (1..=env.spec().level_count)
            .flat_map(|l| env.mechanics(l))
            .filter(|t| *t != "tutorial")
            .collect()
    };
    assert!(tags("smp1").is_disjoint(&tags("smp2")));
}

/// The slow version of the qualification regimes: 20 seeds, a million
/// random actions each, on every level.
#[test]
#[ignore = "several minutes; run with --ignored"]
fn no_random_wins_over_twenty_seeds() {
    let registry = Registry::builtin();
    for game in ["smp1", "smp2"] {
        let env = registry.get(game).unwrap();
        let report = run_regime(Arc::clone(&env), &RegimeConfig::deep((1..=20).collect())).unwrap();
        assert!(report.pass, "{}", report.to_text());
        assert_eq!(report.won_levels(), vec![1]);
    }
}
