use gridbench::envs::{committed_attempts, committed_baseline};
use gridbench::scoring::{
    environment_score, extract_baseline, level_efficiency, level_weights, score_recording, total_score, HumanBaseline,
    LevelActions, Scorecard,
};
use gridbench::Registry;
use proptest::prelude::*;

#[test]
fn golden_values() {
    assert_eq!(level_efficiency(10, LevelActions::Solved(100)).unwrap(), 0.01);
    assert_eq!(level_efficiency(20, LevelActions::Solved(2)).unwrap(), 1.0);
    let w = level_weights(5);
    assert_eq!(w, vec![1.0 / 15.0, 2.0 / 15.0, 3.0 / 15.0, 4.0 / 15.0, 5.0 / 15.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn efficiency_range_cap_and_power(h in 1u64..10_000, a in 1u64..1_000_000) {
        let s = level_efficiency(h, LevelActions::Solved(a)).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        if a <= h {
            prop_assert_eq!(s, 1.0);
        } else {
            let r = h as f64 / a as f64;
            prop_assert!((s - r * r).abs() <= 1e-15);
        }
        // More actions never score higher.
        let worse = level_efficiency(h, LevelActions::Solved(a + 1)).unwrap();
        prop_assert!(worse <= s);
        // Doubling actions past the cap quarters the score.
        if a >= h {
            let doubled = level_efficiency(h, LevelActions::Solved(2 * a)).unwrap();
            prop_assert!((doubled * 4.0 - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn environment_score_is_weighted_mean(scores in proptest::collection::vec(0.0f64..=1.0, 1..12)) {
        let n = scores.len();
        let e = environment_score(&scores, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
        let direct: f64 = level_weights(n).iter().zip(&scores).map(|(w, s)| w * s).sum();
        prop_assert!((e - direct).abs() <= 1e-12);
        // Improving a later level helps at least as much as an earlier one.
        if n >= 2 && scores[0] < 1.0 && scores[n - 1] < 1.0 {
            let d = (1.0 - scores[0]).min(1.0 - scores[n - 1]);
            let mut early = scores.clone();
            early[0] += d;
            let mut late = scores.clone();
            late[n - 1] += d;
            prop_assert!(environment_score(&late, n).unwrap() >= environment_score(&early, n).unwrap() - 1e-12);
        }
    }

    #[test]
    fn total_is_mean(es in proptest::collection::vec(0.0f64..=1.0, 1..20)) {
        let t = total_score(&es).unwrap();
        prop_assert!((t - es.iter().sum::<f64>() / es.len() as f64).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&t));
    }
}

#[test]
fn committed_baselines_match_their_attempts() {
    let registry = Registry::builtin();
    for game in ["smp1", "smp2"] {
        let baseline = committed_baseline(game).unwrap();
        let optimal = &registry.recordings(game).unwrap()[0];
        assert_eq!(extract_baseline(&committed_attempts(game), game, optimal).unwrap(), baseline);
        assert_eq!(HumanBaseline::parse(&baseline.to_text()).unwrap(), baseline);
    }
}

#[test]
fn baseline_participant_scores_one() {
    for game in ["smp1", "smp2"] {
        let baseline = committed_baseline(game).unwrap();
        let b = committed_attempts(game)
            .into_iter()
            .find(|r| r.actor == "participant-b")
            .unwrap();
        let card = score_recording(&b, &baseline).unwrap();
        assert_eq!(card.score, 1.0, "{game}");
        // Slower players lose credit on the levels where they trail.
        let c = committed_attempts(game)
            .into_iter()
            .find(|r| r.actor == "participant-c")
            .unwrap();
        assert!(score_recording(&c, &baseline).unwrap().score < 1.0);
    }
}

#[test]
fn scorecard_round_trip_over_both_environments() {
    let registry = Registry::builtin();
    let cards = ["smp1", "smp2"]
        .iter()
        .map(|g| score_recording(&registry.recordings(g).unwrap()[1], &committed_baseline(g).unwrap()).unwrap())
        .collect();
    let card = Scorecard::new(cards).unwrap();
    assert_eq!(card.dataset_size(), 2);
    // Loss recordings win every level but the last, at optimal pace.
    for e in &card.environments {
        assert_eq!(e.score, 15.0 / 21.0);
    }
    let back = Scorecard::parse(&card.to_text()).unwrap();
    assert_eq!(back, card);
}
