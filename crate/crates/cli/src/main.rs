//! `bidir-bounds`: evaluate, sweep and verify capacity bounds of
//! bidirectional channels.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
//! solver fails or a verification does not hold.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};

use config::Settings;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<bidir_bounds::Error> for CliError {
    fn from(e: bidir_bounds::Error) -> Self {
        match e {
            bidir_bounds::Error::Solver { .. } | bidir_bounds::Error::NotBicovariant(_) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "bidir-bounds", version, about = "Capacity bounds for bidirectional quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one bound and print it as JSON
    Bound(Settings),
    /// Evaluate a bound over a parameter grid and write CSV
    Sweep(Settings),
    /// Run a verification suite and print a summary
    Verify {
        suite: Suite,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Achievability,
    Amortization,
    Bicovariance,
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Bound(s) => commands::bound(&s.resolve()?),
        Command::Sweep(s) => commands::sweep(&s.resolve()?),
        Command::Verify { suite, settings } => {
            let s = settings.resolve()?;
            match suite {
                Suite::Achievability => commands::verify_achievability(),
                Suite::Amortization => commands::verify_amortization(&s),
                Suite::Bicovariance => commands::verify_bicovariance(&s),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
