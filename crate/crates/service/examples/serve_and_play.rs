//! Starts the HTTP service on a free port and plays the push tutorial
//! through it with plain JSON requests.
//!
//!     cargo run -p gridbench-service --example serve_and_play

use std::sync::Arc;

use gridbench::Registry;
use gridbench_service::api::{router, AppState, ServiceConfig};
use serde_json::{json, Value};

fn main() {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async {
            let state = Arc::new(AppState::new(Registry::builtin(), ServiceConfig::default()));
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router(state)).await.unwrap();
        });
    });
    let base = format!("http://{}", rx.recv().unwrap());
    let client = reqwest::blocking::Client::new();

    let games: Value = client.get(format!("{base}/games")).send().unwrap().json().unwrap();
    println!("games: {}", games.as_array().unwrap().iter().map(|g| g["game_id"].to_string()).collect::<Vec<_>>().join(", "));

    let session: Value = client
        .post(format!("{base}/sessions"))
        .json(&json!({"game_id": "smp1", "seed": 1, "actor": "example"}))
        .send()
        .unwrap()
        .json()
        .unwrap();
    let token = session["token"].as_str().unwrap();
    println!("opened {token}, actions {}", session["available_actions"]);

    for action in ["KEY4", "KEY4", "KEY4"] {
        let t: Value = client
            .post(format!("{base}/sessions/{token}/actions"))
            .json(&json!({ "action": action }))
            .send()
            .unwrap()
            .json()
            .unwrap();
        println!("{action}: valid {} level_completed {} counts {}", t["action_was_valid"], t["level_completed"], t["action_counts"]);
    }

    let card: Value = client.get(format!("{base}/sessions/{token}/scorecard")).send().unwrap().json().unwrap();
    println!("level 1: {}", card["levels"][0]);
    let rec = client.get(format!("{base}/sessions/{token}/recording")).send().unwrap().text().unwrap();
    print!("{rec}");
}
