//! `rydanneal`: command-line runner for the Rydberg annealing pipeline.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::commands::Infeasible;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "rydanneal", version, about = "Rydberg-atom annealing for Max-Cut and MIS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed applied to embedding, noise and annealing.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Graph JSON file (a single document, or an array for family commands).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode, embed, optimise the pulse and evaluate the final state.
    Solve,
    /// Simulated-annealing success statistics over a family or budget sweep.
    BenchmarkSa,
    /// Quantum protocol versus simulated annealing per graph.
    Compare,
    /// Post-hoc versus in-loop laser-noise optimisation.
    NoiseStudy,
    /// Exact optimum, cost spectrum and hardness parameter.
    BruteForce,
    /// Atom layout and feasibility report only.
    Embed,
}

fn run(cli: Cli) -> Result<String> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(cli.graph, cli.seed, cli.out);
    cfg.validate()?;
    match cli.command {
        Command::Solve => commands::solve(&cfg),
        Command::BenchmarkSa => commands::benchmark_sa(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::NoiseStudy => commands::noise_study(&cfg),
        Command::BruteForce => commands::brute_force(&cfg),
        Command::Embed => commands::embed(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Infeasible>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
