mod check;
mod common;
mod inject;
mod report;
mod sim;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Stream runtime verification for AEB traces.
#[derive(Debug, Parser)]
#[command(name = "rvmon", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate monitors over a recorded JSON Lines trace.
    Check(check::CheckArgs),
    /// Simulate an AEB scenario with monitors attached.
    Sim(sim::SimArgs),
    /// Summarize the report in a run directory.
    Report(report::ReportArgs),
    /// Apply an attack to a recorded trace.
    Inject(inject::InjectArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RVMON_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Check(args) => check::run(args),
        Command::Sim(args) => sim::run(args),
        Command::Report(args) => report::run(args),
        Command::Inject(args) => inject::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
