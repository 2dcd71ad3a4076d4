use std::collections::HashMap;
use std::time::Duration;

use gridbench::envs::committed_baseline;
use gridbench::scoring::LevelActions;
use gridbench::{Action, Outcome, Registry, Source};
use gridbench_service::agent::{
    run_reference_agent, AgentError, AgentRunConfig, ConstantEndpoint, FlakyEndpoint, Role, ScriptedEndpoint,
    SYSTEM_PROMPT,
};

fn baselines() -> HashMap<String, gridbench::scoring::HumanBaseline> {
    ["smp1", "smp2"]
        .into_iter()
        .map(|g| (g.to_string(), committed_baseline(g).unwrap()))
        .collect()
}

fn config(games: &[&str]) -> AgentRunConfig {
    AgentRunConfig {
        dataset: games.iter().map(|g| g.to_string()).collect(),
        backoff: Duration::ZERO,
        ..AgentRunConfig::default()
    }
}

#[test]
fn replaying_the_solution_scores_full_marks() {
    let registry = Registry::builtin();
    let solution = &registry.recordings("smp1").unwrap()[0];
    let mut endpoint = ScriptedEndpoint::replaying(solution);
    let report = run_reference_agent(&mut endpoint, &registry, &baselines(), &config(&["smp1"])).unwrap();
    let run = &report.runs[0];
    assert_eq!(run.recording.outcome, Outcome::Win);
    assert_eq!(run.recording.source, Source::Agent);
    assert_eq!(run.recording.action_list(), solution.action_list());
    assert_eq!(report.scorecard.unwrap().total, 1.0);
    assert!(gridbench::replay(&registry, &run.recording).unwrap().is_identical());

    // Every turn carries the fixed prompt and, after the first, the previous reply.
    let first = &endpoint.seen[0];
    assert_eq!(first[0].role, Role::System);
    assert_eq!(first[0].content, SYSTEM_PROMPT);
    assert_eq!(first.len(), 2);
    let second = &endpoint.seen[1];
    assert_eq!(second[1].role, Role::Assistant);
    assert_eq!(second[1].content, format!("I will play {}.", solution.actions[0].action));
    assert!(second[2].content.starts_with("Frame 1 of "));
    assert!(second[2].content.ends_with("Available actions: KEY1, KEY2, KEY3, KEY4, UNDO, RESET, SELECT x y"), "{}", second[2].content.lines().last().unwrap());
}

#[test]
fn a_stuck_agent_stops_at_the_cutoff() {
    let registry = Registry::builtin();
    let mut endpoint = ConstantEndpoint("KEY3".into());
    let report = run_reference_agent(&mut endpoint, &registry, &baselines(), &config(&["smp1"])).unwrap();
    let run = &report.runs[0];
    let h = committed_baseline("smp1").unwrap().h(1);
    assert_eq!(run.recording.len() as u64, 5 * h);
    assert!(run.cut_off);
    let card = run.scorecard.as_ref().unwrap();
    assert!(card.cut_off);
    assert!(card.levels.iter().all(|l| l.actions == LevelActions::Unsolved));
    assert_eq!(card.score, 0.0);
}

#[test]
fn retries_do_not_count() {
    let registry = Registry::builtin();
    let solution = &registry.recordings("smp2").unwrap()[0];
    let mut steady = ScriptedEndpoint::replaying(solution);
    let clean = run_reference_agent(&mut steady, &registry, &baselines(), &config(&["smp2"])).unwrap();
    let mut flaky = FlakyEndpoint::new(ScriptedEndpoint::replaying(solution), vec![0, 5, 6, 40]);
    let noisy = run_reference_agent(&mut flaky, &registry, &baselines(), &config(&["smp2"])).unwrap();
    assert_eq!(noisy.runs[0].retries, 4);
    assert_eq!(noisy.runs[0].recording.level_counts(), clean.runs[0].recording.level_counts());
    assert_eq!(noisy.runs[0].recording.action_list(), clean.runs[0].recording.action_list());
    assert_eq!(noisy.scorecard.unwrap().total, clean.scorecard.unwrap().total);
}

#[test]
fn exhausted_retries_end_the_run() {
    let registry = Registry::builtin();
    let mut endpoint = FlakyEndpoint::new(ConstantEndpoint("KEY1".into()), (0..10).collect());
    let err = run_reference_agent(&mut endpoint, &registry, &baselines(), &config(&["smp1"])).unwrap_err();
    assert!(matches!(err, AgentError::Endpoint { attempts: 4, .. }), "{err}");
}

#[test]
fn unusable_replies_get_one_reminder_then_a_fallback() {
    let registry = Registry::builtin();
    let mut endpoint = ScriptedEndpoint::new(vec!["no idea".into(), "still thinking".into(), "KEY4".into()]);
    let mut cfg = config(&["smp1"]);
    cfg.unbaselined_budget = 3;
    let report = run_reference_agent(&mut endpoint, &registry, &HashMap::new(), &cfg).unwrap();
    let run = &report.runs[0];
    assert_eq!(run.reminders, 1);
    assert_eq!(run.fallbacks, 1);
    assert!(report.scorecard.is_none());
    // The fallback is counted and leaves the state as it was.
    let actions = run.recording.action_list();
    let fresh = registry.open("smp1", 0).unwrap();
    assert_eq!(run.recording.actions[0].digest, fresh.state_digest());
    assert_ne!(actions[0], Action::Key4);
    assert!(actions[1..].iter().all(|a| *a == Action::Key4));
    assert_eq!(endpoint.seen[1].last().unwrap().role, Role::User);
    assert!(endpoint.seen[1].last().unwrap().content.contains("did not contain"));
}

#[test]
fn bad_configs_are_refused() {
    let registry = Registry::builtin();
    let mut endpoint = ConstantEndpoint("KEY1".into());
    let err = run_reference_agent(&mut endpoint, &registry, &baselines(), &config(&[])).unwrap_err();
    assert!(matches!(err, AgentError::EmptyDataset));
    let mut cfg = config(&["smp1"]);
    cfg.cutoff_multiplier = 0;
    assert!(matches!(
        run_reference_agent(&mut endpoint, &registry, &baselines(), &cfg),
        Err(AgentError::BadCutoff)
    ));
    assert!(matches!(
        run_reference_agent(&mut endpoint, &registry, &baselines(), &config(&["nope"])),
        Err(AgentError::Engine(_))
    ));
}
