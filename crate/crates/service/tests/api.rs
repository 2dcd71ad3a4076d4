use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use gridbench::envs::committed_attempts;
use gridbench::{Action, Recording, Registry};
use gridbench_service::api::{router, AppState, ServiceConfig};
use gridbench_service::wire::ActionRequest;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app_with(config: ServiceConfig) -> Router {
    router(Arc::new(AppState::new(Registry::builtin(), config)))
}

fn app() -> Router {
    app_with(ServiceConfig::default())
}

async fn raw(app: &Router, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let builder = Request::builder().method(method).uri(path);
    let req = match body {
        Some(v) => builder
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn call(app: &Router, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = raw(app, method, path, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn open(app: &Router, game: &str, seed: u64) -> Value {
    let (status, v) = call(app, "POST", "/sessions", Some(json!({"game_id": game, "seed": seed}))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v
}

async fn act(app: &Router, token: &str, action: Action) -> (StatusCode, Value) {
    let body = serde_json::to_value(ActionRequest::key(action)).unwrap();
    call(app, "POST", &format!("/sessions/{token}/actions"), Some(body)).await
}

fn token(v: &Value) -> String {
    v["token"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn open_returns_reset_frames() {
    let app = app();
    let v = open(&app, "smp1", 7).await;
    assert_eq!(v["level"], 1);
    assert_eq!(v["status"], "IN_PROGRESS");
    assert_eq!(v["action_counts"], json!([0]));
    assert_eq!(v["level_count"], 6);
    let frame = &v["frames"][0];
    assert_eq!(frame.as_array().unwrap().len(), 64);
    assert!(frame[0].as_array().unwrap().iter().all(|c| c.as_u64().unwrap() < 16));

    let (status, e) = call(&app, "POST", "/sessions", Some(json!({"game_id": "zzzz"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(e["error"].as_str().unwrap().contains("zzzz"));
}

#[tokio::test]
async fn same_seed_same_frames() {
    let app = app();
    let a = open(&app, "smp2", 3).await;
    let b = open(&app, "smp2", 3).await;
    assert_ne!(a["token"], b["token"]);
    assert_eq!(a["frames"], b["frames"]);
    assert_eq!(a["state_hash"], b["state_hash"]);
    for action in [Action::Key2, Action::Key3, Action::Key1] {
        let (_, ta) = act(&app, &token(&a), action).await;
        let (_, tb) = act(&app, &token(&b), action).await;
        assert_eq!(ta["frames"], tb["frames"]);
        assert_eq!(ta["state_hash"], tb["state_hash"]);
    }
}

#[tokio::test]
async fn every_submission_counts() {
    let app = app();
    let t = token(&open(&app, "smp1", 1).await);
    let (status, v) = call(
        &app,
        "POST",
        &format!("/sessions/{t}/actions"),
        Some(json!({"action": "SELECT", "x": 3, "y": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["action"], "SELECT:3,3");
    assert_eq!(v["action_counts"][0], 1);
    // A blocked move changes nothing but still counts.
    let (_, v) = act(&app, &t, Action::Key3).await;
    assert_eq!(v["action_was_valid"], false);
    assert_eq!(v["action_counts"][0], 2);
}

#[tokio::test]
async fn malformed_actions_are_rejected_without_counting() {
    let app = app();
    let t = token(&open(&app, "smp1", 1).await);
    let path = format!("/sessions/{t}/actions");
    for body in [
        json!({"action": "SELECT", "x": 64, "y": 0}),
        json!({"action": "SELECT"}),
        json!({"action": "JUMP"}),
        json!({"act": "KEY1"}),
    ] {
        let (status, v) = call(&app, "POST", &path, Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert!(v["error"].is_string());
    }
    // smp2 declares no Undo.
    let t2 = token(&open(&app, "smp2", 1).await);
    let (status, _) = act(&app, &t2, Action::Undo).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (_, v) = call(&app, "GET", &format!("/sessions/{t}/frames"), None).await;
    assert_eq!(v["action_counts"][0], 0);
}

#[tokio::test]
async fn finished_sessions_refuse_actions() {
    let app = app();
    let t = token(&open(&app, "tiny", 0).await);
    let (_, v) = act(&app, &t, Action::Key2).await;
    assert_eq!(v["game_over"], true);
    assert_eq!(v["status"], "GAME_OVER");
    let (status, e) = act(&app, &t, Action::Key1).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(e["error"].is_string());
}

#[tokio::test]
async fn quota_and_expiry() {
    let app = app_with(ServiceConfig {
        max_sessions: 2,
        ..ServiceConfig::default()
    });
    open(&app, "tiny", 0).await;
    open(&app, "tiny", 0).await;
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"game_id": "tiny"}))).await;
    assert_eq!(status, StatusCode::TOO_MANY_REQUESTS);

    let app = app_with(ServiceConfig {
        idle_timeout: Duration::ZERO,
        ..ServiceConfig::default()
    });
    let t = token(&open(&app, "tiny", 0).await);
    let (status, _) = call(&app, "GET", &format!("/sessions/{t}/frames"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", "/sessions/no-such-token/scorecard", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn reads_do_not_mutate() {
    let app = app();
    let t = token(&open(&app, "smp1", 5).await);
    act(&app, &t, Action::Key4).await;
    act(&app, &t, Action::Key2).await;
    let card = call(&app, "GET", &format!("/sessions/{t}/scorecard"), None).await;
    let frames = call(&app, "GET", &format!("/sessions/{t}/frames"), None).await;
    for _ in 0..3 {
        assert_eq!(call(&app, "GET", &format!("/sessions/{t}/scorecard"), None).await, card);
        assert_eq!(call(&app, "GET", &format!("/sessions/{t}/frames"), None).await, frames);
    }
    assert_eq!(card.1["action_counts"][0], 2);
}

#[tokio::test]
async fn scorecard_of_a_replayed_attempt() {
    let app = app();
    let attempt = &committed_attempts("smp1")[1];
    let t = token(&open(&app, "smp1", attempt.seed).await);
    for a in attempt.action_list() {
        let (status, _) = act(&app, &t, a).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, card) = call(&app, "GET", &format!("/sessions/{t}/scorecard"), None).await;
    assert_eq!(card["status"], "ENVIRONMENT_COMPLETE");
    assert_eq!(card["levels_completed"], 6);
    assert_eq!(card["score"], 1.0);
    assert_eq!(card["cut_off"], false);
    assert_eq!(card["baseline_sha256"].as_str().unwrap().len(), 64);
}

#[tokio::test]
async fn the_cutoff_leaves_a_level_unsolved() {
    let app = app();
    let t = token(&open(&app, "smp1", 0).await);
    // Level 1 has h = 5; a wall-bump 25 times reaches the cutoff.
    for _ in 0..25 {
        act(&app, &t, Action::Key3).await;
    }
    let (_, card) = call(&app, "GET", &format!("/sessions/{t}/scorecard"), None).await;
    assert_eq!(card["levels"][0]["actions"], Value::Null);
    assert_eq!(card["levels"][0]["score"], 0.0);
    assert_eq!(card["cut_off"], true);
    assert_eq!(card["score"], 0.0);
}

#[tokio::test]
async fn session_recordings_replay() {
    let app = app();
    let t = token(&open(&app, "smp1", 11).await);
    for a in [Action::Key4, Action::Key2, Action::Undo, Action::Key4] {
        act(&app, &t, a).await;
    }
    let (status, body) = raw(&app, "GET", &format!("/sessions/{t}/recording"), None).await;
    assert_eq!(status, StatusCode::OK);
    let rec = Recording::parse(std::str::from_utf8(&body).unwrap()).unwrap();
    assert_eq!(rec.seed, 11);
    assert_eq!(rec.len(), 4);
    assert!(gridbench::replay(&Registry::builtin(), &rec).unwrap().is_identical());
}

#[tokio::test]
async fn recording_frames_endpoint() {
    let app = app();
    let registry = Registry::builtin();
    let rec = &registry.recordings("smp1").unwrap()[0];
    let (status, v) = call(
        &app,
        "POST",
        "/recordings/frames",
        Some(json!({"recording": rec.to_text(), "index": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let expected = gridbench::recording::frames_at(&registry, rec, 3).unwrap();
    let last = expected.last().as_bytes();
    let got: Vec<u8> = v["frames"].as_array().unwrap().last().unwrap()
        .as_array().unwrap().iter()
        .flat_map(|row| row.as_array().unwrap().iter().map(|c| c.as_u64().unwrap() as u8))
        .collect();
    assert_eq!(got, last);
    // Level 1 takes three actions, so level 2 starts at index 3.
    assert_eq!(v["level_starts"][0], 3);
    assert_eq!(v["level_starts"].as_array().unwrap().len(), 5);

    let (status, _) = call(
        &app,
        "POST",
        "/recordings/frames",
        Some(json!({"recording": rec.to_text(), "index": rec.len() + 1})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn games_are_listed() {
    let (status, v) = call(&app(), "GET", "/games", None).await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|g| g["game_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["smp1", "smp2", "tiny"]);
    assert_eq!(v[0]["has_baseline"], true);
    assert_eq!(v[2]["benchmark"], false);
}
