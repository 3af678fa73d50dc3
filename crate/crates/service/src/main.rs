use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use story_service::{router, ServiceConfig, SessionManager};

#[derive(Parser)]
#[command(name = "story-service", version, about = "Serve interactive narrative search sessions over HTTP")]
struct Cli {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory for saved sessions; restored on start.
    #[arg(long)]
    state_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    initial_population: Option<usize>,
    /// Parent pairs per generation.
    #[arg(long)]
    offspring: Option<usize>,
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = ServiceConfig {
        state_dir: cli.state_dir,
        seed: cli.seed,
        ..ServiceConfig::default()
    };
    if let Some(n) = cli.initial_population {
        config.initial_population = n;
    }
    if let Some(n) = cli.offspring {
        config.offspring_per_generation = n;
    }
    let manager = match SessionManager::open(config) {
        Ok(m) => Arc::new(m),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(cli.addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", cli.addr);
            return ExitCode::FAILURE;
        }
    };
    println!("listening on {}", cli.addr);
    let served = axum::serve(listener, router(manager.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    let stopping = manager.clone();
    let _ = tokio::task::spawn_blocking(move || stopping.shutdown()).await;
    match served {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
