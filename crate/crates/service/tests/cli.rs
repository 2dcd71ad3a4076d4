use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::http::HeaderMap;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

fn gridbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridbench")).args(args).output().unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn explore_prints_the_exact_probability() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let o = gridbench(&["explore", "tiny", "--level", "1", "--max-nodes", "1000", "--out", graph.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("nodes 9 edges 28"), "{}", stdout(&o));
    assert!(stdout(&o).contains("p_win 3.793103e-1"));
    assert!(std::fs::read_to_string(graph).unwrap().starts_with("# gridbench state-graph v1"));

    let o = gridbench(&["explore", "tiny", "--level", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gridbench(&["explore", "tiny", "--level", "9", "--max-nodes", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_verifies_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let o = gridbench(&["replay", &data("tiny-win.rec"), "--dump-frames", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("identical"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 10);

    let text = std::fs::read_to_string(data("tiny-win.rec")).unwrap();
    let tampered = dir.path().join("bad.rec");
    std::fs::write(&tampered, text.replace("outcome win", "outcome loss")).unwrap();
    assert_eq!(gridbench(&["replay", tampered.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(gridbench(&["replay", "/no/such/file"]).status.code(), Some(2));
}

#[test]
fn score_uses_the_committed_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("card.txt");
    let o = gridbench(&["score", &data("smp1-win.rec"), &data("smp2-win.rec"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let card = gridbench::scoring::Scorecard::parse(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(card.total, 1.0);
    // tiny has no baseline.
    assert_eq!(gridbench(&["score", &data("tiny-win.rec")]).status.code(), Some(2));
}

#[test]
fn quick_validation() {
    let o = gridbench(&["validate", "smp1", "--quick", "--seeds", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("qualification smp1 PASS"));
    assert_eq!(gridbench(&["validate", "nope", "--quick"]).status.code(), Some(2));
}

/// A stand-in chat-completions server that always answers `KEY3` and
/// remembers the authorization headers it saw.
fn spawn_model_server() -> (String, Arc<std::sync::Mutex<Vec<String>>>, Arc<AtomicUsize>) {
    let auth = Arc::new(std::sync::Mutex::new(Vec::new()));
    let calls = Arc::new(AtomicUsize::new(0));
    let (a, c) = (auth.clone(), calls.clone());
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let app = Router::new().route(
                "/v1/chat/completions",
                post(move |headers: HeaderMap, Json(body): Json<Value>| {
                    let (a, c) = (a.clone(), c.clone());
                    async move {
                        assert_eq!(body["messages"][0]["role"], "system");
                        c.fetch_add(1, Ordering::SeqCst);
                        let h = headers.get("authorization").map(|v| v.to_str().unwrap().to_string());
                        a.lock().unwrap().push(h.unwrap_or_default());
                        Json(json!({"choices": [{"message": {"role": "assistant", "content": "Trying left. KEY3"}}]}))
                    }
                }),
            );
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    (format!("http://{addr}/v1"), auth, calls)
}

#[test]
fn agent_run_against_a_chat_endpoint() {
    let (url, auth, calls) = spawn_model_server();
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gridbench"))
        .args(["agent-run", "--endpoint", &url, "--model", "stub", "--dataset", "smp1"])
        .args(["--out", dir.path().to_str().unwrap(), "--api-key-env", "GRIDBENCH_TEST_KEY"])
        .env("GRIDBENCH_TEST_KEY", "sk-test-123")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(calls.load(Ordering::SeqCst), 25);
    assert!(auth.lock().unwrap().iter().all(|h| h == "Bearer sk-test-123"));
    let rec = std::fs::read_to_string(dir.path().join("smp1.rec")).unwrap();
    assert!(!rec.contains("sk-test-123"));
    let rec = gridbench::Recording::parse(&rec).unwrap();
    assert_eq!(rec.len(), 25);
    assert_eq!(rec.actor, "stub");
    assert!(std::fs::read_to_string(dir.path().join("scorecard.txt")).unwrap().contains("cutoff yes"));
}
