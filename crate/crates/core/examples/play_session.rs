//! Opens a session on the first push level, walks the crate onto its mark
//! and prints what each action did.
//!
//!     cargo run -p gridbench --example play_session

use gridbench::{Action, Registry};

fn main() {
    let registry = Registry::builtin();
    let mut session = registry.open("smp1", 0).expect("smp1 is built in");
    println!("{} level {} of {}", session.spec().game_id, session.level(), session.spec().level_count);

    // Bump the wall, step right, undo, then push the crate home.
    for action in [Action::Key3, Action::Key4, Action::Undo, Action::Key4, Action::Key4, Action::Key4] {
        let t = session.step(action).expect("session is live");
        println!(
            "{action:<6} valid {:<5} level_completed {:<5} frames {} digest {}",
            t.action_was_valid,
            t.level_completed,
            t.frames.len(),
            t.state_hash
        );
    }
    println!("now on level {}, counts {:?}", session.level(), session.action_counts());
}
