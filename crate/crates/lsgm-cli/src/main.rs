//! Command-line harness around the matching library: generate benchmark
//! pairs, match two graphs end to end, or run an experiment grid to CSV.

mod config;
mod experiment;
mod generate;
mod matchcmd;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lsgm", version, about = "Divide-and-conquer seeded graph matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a correlated graph pair plus truth and seed files
    Generate(generate::GenerateArgs),
    /// Match two edge-list graphs and write the alignment as TSV
    Match(matchcmd::MatchArgs),
    /// Run an experiment grid, appending one CSV row per replicate
    Experiment(experiment::ExperimentArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => generate::run(&args),
        Command::Match(args) => matchcmd::run(&args),
        Command::Experiment(args) => experiment::run(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
