use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hkc_cli::{commands, seed_override, CliError, Output};

#[derive(Parser)]
#[command(name = "hkc", version, about = "Hegselmann-Krause consensus simulator and Monte Carlo harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and print its summary.
    Simulate {
        config: PathBuf,
        /// Write a per-event CSV trajectory.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Estimate the consensus probability over `trials` runs.
    Estimate {
        config: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        parallel: u64,
    },
    /// Print the theoretical lower bound without simulating.
    Bound { config: PathBuf },
    /// Check that the generator drift of X(c) is nonpositive on random cases.
    CheckInvariants {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Simulate { config, trace } => {
            let resolved = commands::load(&config, seed_override()?)?;
            commands::simulate(&resolved, trace.as_deref())
        }
        Command::Estimate { config, parallel } => {
            let resolved = commands::load(&config, seed_override()?)?;
            commands::estimate(&resolved, parallel as usize)
        }
        Command::Bound { config } => {
            let resolved = commands::load(&config, seed_override()?)?;
            commands::bound(&resolved)
        }
        Command::CheckInvariants { cases, seed } => commands::check_invariants(cases, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("hkc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
