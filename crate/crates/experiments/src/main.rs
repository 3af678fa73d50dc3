use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use story_experiments::{run_experiment, DimsMode, ExperimentConfig, ExperimentTarget};

#[derive(Parser)]
#[command(name = "story-exp", version, about = "Run narrative-grammar search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dims {
    Pair,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its report.
    Run {
        /// 1, 2, 3, 4 (all design steps), 4.1 to 4.5, or a graph document path.
        #[arg(long)]
        experiment: String,
        #[arg(long, value_enum, default_value = "pair")]
        dims: Dims,
        #[arg(long, value_enum, default_value = "on")]
        constraints: Switch,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        generations: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Three runs, 100 generations, 50 parent pairs per generation.
        #[arg(long)]
        desk: bool,
        /// Parent pairs per generation.
        #[arg(long)]
        offspring: Option<usize>,
        #[arg(long)]
        initial_population: Option<usize>,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        experiment,
        dims,
        constraints,
        runs,
        generations,
        seed,
        out,
        desk,
        offspring,
        initial_population,
    } = Cli::parse().command;

    let target = match ExperimentTarget::parse(&experiment) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let dims = match dims {
        Dims::Pair => DimsMode::Pair,
        Dims::All => DimsMode::All,
    };
    let mut config = if desk {
        ExperimentConfig::desk(target, dims)
    } else {
        ExperimentConfig::full(target, dims)
    };
    config.constraints_enabled = matches!(constraints, Switch::On);
    config.seed = seed;
    if let Some(r) = runs {
        config.runs = r;
    }
    if let Some(g) = generations {
        config.generations = g;
    }
    if let Some(o) = offspring {
        config.offspring_per_generation = o;
    }
    if let Some(p) = initial_population {
        config.initial_population = p;
    }

    match run_experiment(&config, Some(&out)) {
        Ok(report) => {
            let s = &report.summary;
            println!(
                "experiment {} ({} dims, constraints {}): coverage {:.3}±{:.3}, uniques {:.1}±{:.1}, fitness {:.3}±{:.3}, interestingness {:.3}±{:.3}",
                s.experiment,
                s.dims,
                if s.constraints { "on" } else { "off" },
                s.coverage.mean,
                s.coverage.std,
                s.uniques.mean,
                s.uniques.std,
                s.fitness.mean,
                s.fitness.std,
                s.interestingness.mean,
                s.interestingness.std,
            );
            println!("report written to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
