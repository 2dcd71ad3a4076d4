//! The `gridbench` command line. Every subcommand exits 0 on success, 1 when
//! the check it performs fails, and 2 on usage or input errors.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use gridbench::envs::committed_baseline;
use gridbench::scoring::{score_recording, HumanBaseline, Scorecard};
use gridbench::validation::{
    build_state_graph, estimate_win_probability, qualify, Budgets, QualifyConfig, Regime, Terminal,
};
use gridbench::{Recording, Registry, Session};

use crate::agent::{run_reference_agent, AgentRunConfig, OpenAiEndpoint};
use crate::api::{serve, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "gridbench", about = "Grid environment benchmark tools", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the qualification suite on a registered environment.
    Validate(ValidateArgs),
    /// Build the state graph of one level and estimate its random-play win
    /// probability.
    Explore(ExploreArgs),
    /// Score recordings against human baselines.
    Score(ScoreArgs),
    /// Check or dump a recording.
    Replay(ReplayArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Play a dataset through a chat-completions endpoint.
    AgentRun(AgentRunArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub game: String,
    /// Comma-separated random seeds.
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
    pub seeds: Vec<u64>,
    /// Only run the 50k-step sanity regime.
    #[arg(long)]
    pub quick: bool,
    /// Write the full report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    pub game: String,
    #[arg(long)]
    pub level: u32,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long)]
    pub max_edges: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub max_seconds: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the graph in text form here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(required = true)]
    pub recordings: Vec<PathBuf>,
    /// Baseline file; defaults to the committed baseline of each game.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Write the scorecard in text form here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub recording: PathBuf,
    /// Write the frames after every action into this directory.
    #[arg(long)]
    pub dump_frames: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value_t = 1024)]
    pub max_sessions: usize,
    /// Minutes of inactivity before a session is dropped.
    #[arg(long, default_value_t = 60)]
    pub idle_minutes: u64,
}

#[derive(Debug, Args)]
pub struct AgentRunArgs {
    /// API root of an OpenAI-compatible server, e.g. http://localhost:8000/v1
    #[arg(long)]
    pub endpoint: String,
    #[arg(long)]
    pub model: String,
    #[arg(long, value_delimiter = ',', default_values_t = ["smp1".to_string(), "smp2".to_string()])]
    pub dataset: Vec<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "GRIDBENCH_API_KEY")]
    pub api_key_env: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for recordings and the scorecard.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Failure(i32, String);

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure(2, msg.to_string())
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    run(cli)
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let registry = Registry::builtin();
    let result = match cli.command {
        Command::Validate(a) => validate(&registry, a),
        Command::Explore(a) => explore(&registry, a),
        Command::Score(a) => score(a),
        Command::Replay(a) => replay(&registry, a),
        Command::Serve(a) => serve_cmd(registry, a),
        Command::AgentRun(a) => agent_run(&registry, a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure(code, msg)) => {
            eprintln!("gridbench: {msg}");
            code
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn validate(registry: &Registry, a: ValidateArgs) -> Result<(), Failure> {
    let mut config = QualifyConfig {
        seeds: a.seeds,
        ..QualifyConfig::default()
    };
    if a.quick {
        config.regimes = vec![Regime::Sanity50k];
    }
    let report = qualify(registry, &a.game, &config).map_err(usage)?;
    let text = report.to_text();
    print!("{text}");
    if let Some(path) = &a.report {
        write(path, &text)?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure(1, format!("{} failed qualification", a.game)))
    }
}

/// Fails with 1 when no win is reachable in the explored part of the graph.
fn explore(registry: &Registry, a: ExploreArgs) -> Result<(), Failure> {
    let env = registry.get(&a.game).map_err(usage)?;
    let budgets = Budgets {
        max_steps: a.max_steps,
        max_seconds: a.max_seconds,
        max_nodes: a.max_nodes,
        max_edges: a.max_edges,
    };
    let graph = build_state_graph(env.as_ref(), a.level, &budgets, a.seed).map_err(usage)?;
    let p = estimate_win_probability(&graph).map_err(usage)?;
    let s = &graph.stats;
    println!(
        "game {} level {} nodes {} edges {} max_depth {} merge_density {:.4} cycle {} fully_explored {} stop {:?}",
        a.game,
        a.level,
        s.node_count,
        s.edge_count,
        s.max_depth,
        s.merge_density,
        s.cycle_detected,
        s.fully_explored,
        s.stop
    );
    match p.exact {
        Some(x) => println!("p_win {x:.6e}"),
        None => println!("p_win in [{:.6e}, {:.6e}]", p.lower, p.upper),
    }
    let win = graph.shortest_path(Terminal::is_win);
    match &win {
        Some(path) => println!("shortest_win {}", path.len()),
        None => println!("shortest_win none"),
    }
    if let Some(path) = &a.out {
        write(path, &graph.to_text())?;
    }
    match win {
        Some(_) => Ok(()),
        None => Err(Failure(1, "no win reachable in the explored graph".into())),
    }
}

fn score(a: ScoreArgs) -> Result<(), Failure> {
    let given = match &a.baseline {
        Some(path) => Some(HumanBaseline::parse(&read(path)?).map_err(usage)?),
        None => None,
    };
    let mut cards = Vec::new();
    for path in &a.recordings {
        let rec = Recording::parse(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let baseline = match &given {
            Some(b) => b.clone(),
            None => committed_baseline(rec.game_id.as_str())
                .ok_or_else(|| usage(format!("no baseline for {}", rec.game_id)))?,
        };
        cards.push(score_recording(&rec, &baseline).map_err(usage)?);
    }
    let card = Scorecard::new(cards).map_err(usage)?;
    print!("{}", card.to_table());
    if let Some(path) = &a.out {
        write(path, &card.to_text())?;
    }
    Ok(())
}

fn frames_text(frames: &gridbench::FrameSequence) -> String {
    frames
        .frames()
        .iter()
        .map(crate::agent::render_frame)
        .collect::<Vec<_>>()
        .join("\n")
}

fn replay(registry: &Registry, a: ReplayArgs) -> Result<(), Failure> {
    let rec = Recording::parse(&read(&a.recording)?).map_err(usage)?;
    let verdict = gridbench::replay(registry, &rec).map_err(usage)?;
    println!(
        "{} seed {} actions {} outcome {}: {}",
        rec.game_id,
        rec.seed,
        rec.len(),
        rec.outcome,
        if verdict.is_identical() { "identical".to_string() } else { format!("{verdict:?}") }
    );
    if let Some(dir) = &a.dump_frames {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        let mut session = Session::open(registry.get(rec.game_id.as_str()).map_err(usage)?, rec.seed);
        write(&dir.join("00000.txt"), &frames_text(session.frames()))?;
        for (i, stored) in rec.actions.iter().enumerate() {
            if session.step(stored.action).is_err() {
                break;
            }
            write(&dir.join(format!("{:05}.txt", i + 1)), &frames_text(session.frames()))?;
        }
    }
    if verdict.is_identical() {
        Ok(())
    } else {
        Err(Failure(1, "replay diverged".into()))
    }
}

fn serve_cmd(registry: Registry, a: ServeArgs) -> Result<(), Failure> {
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().map_err(usage)?;
    let config = ServiceConfig {
        max_sessions: a.max_sessions,
        idle_timeout: std::time::Duration::from_secs(a.idle_minutes * 60),
    };
    let state = Arc::new(AppState::new(registry, config));
    let runtime = tokio::runtime::Runtime::new().map_err(usage)?;
    runtime.block_on(serve(addr, state)).map_err(usage)
}

fn agent_run(registry: &Registry, a: AgentRunArgs) -> Result<(), Failure> {
    let mut endpoint = OpenAiEndpoint::new(&a.endpoint, &a.model, &a.api_key_env);
    let baselines: HashMap<String, HumanBaseline> = a
        .dataset
        .iter()
        .filter_map(|g| committed_baseline(g).map(|b| (g.clone(), b)))
        .collect();
    let config = AgentRunConfig {
        dataset: a.dataset,
        seed: a.seed,
        actor: a.model.clone(),
        ..AgentRunConfig::default()
    };
    let report = run_reference_agent(&mut endpoint, registry, &baselines, &config).map_err(|e| Failure(1, e.to_string()))?;
    for run in &report.runs {
        println!(
            "{} actions {} outcome {} retries {} reminders {} fallbacks {}",
            run.recording.game_id,
            run.recording.len(),
            run.recording.outcome,
            run.retries,
            run.reminders,
            run.fallbacks
        );
    }
    if let Some(card) = &report.scorecard {
        print!("{}", card.to_table());
    }
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        for run in &report.runs {
            write(&dir.join(format!("{}.rec", run.recording.game_id)), &run.recording.to_text())?;
        }
        if let Some(card) = &report.scorecard {
            write(&dir.join("scorecard.txt"), &card.to_text())?;
        }
    }
    Ok(())
}
