use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wikirank::pipeline::{Overrides, Pipeline, RunConfig, Stage};

#[derive(Parser)]
#[command(name = "wikirank", version, about = "Rank universities across Wikipedia editions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[arg(long, global = true, value_name = "F")]
    alpha: Option<f64>,
    #[arg(long, global = true, value_name = "F")]
    tolerance: Option<f64>,
    /// List length T.
    #[arg(long, global = true, value_name = "T")]
    top: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// PageRank, CheiRank and 2DRank of every edition.
    Rank,
    /// Top-T university lists per edition and algorithm.
    Extract,
    /// World rankings, country scores and per-capita tables.
    Merge,
    /// Overlap, rank plane, geography and century tables.
    Analyze,
    /// The network of cultures and its ranking.
    Cultures,
    /// Every stage, reusing intermediates that are still valid.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    let mut config = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    config.apply(&Overrides {
        workers: cli.workers,
        alpha: cli.alpha,
        tolerance: cli.tolerance,
        top: cli.top,
        output_dir: cli.out,
    });
    let target = match cli.command {
        Command::Rank => Some(Stage::Rank),
        Command::Extract => Some(Stage::Extract),
        Command::Merge => Some(Stage::Merge),
        Command::Analyze => Some(Stage::Analyze),
        Command::Cultures => Some(Stage::Cultures),
        Command::All => None,
    };
    match Pipeline::new(&config).run(target) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for s in &report.stages {
                let state = if s.skipped { "up to date" } else { "done" };
                eprintln!("{:<9} {state:<10} {:>4} files {:>8.3}s", s.stage.as_str(), s.files, s.seconds);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
