//! `longrange`: adiabatic and diabatic long-range curves, Landau-Zener
//! crossings, validity radii and basis convergence for a dimer + excited
//! atom complex.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or species file: exit code 2.
    Usage(String),
    /// Engine failure: exit code 1.
    Engine(longrange::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl From<longrange::Error> for CliError {
    fn from(e: longrange::Error) -> Self {
        CliError::Engine(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Engine(_) | CliError::Io { .. } => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "longrange", version, about = "Long-range atom-dimer interaction curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Adiabatic curves and diabatic diagonals, one CSV pair and sidecar per block
    Curves,
    /// Diabatic crossings with Landau-Zener probabilities
    Crossings,
    /// Normalized couplings per state and validity radii of the 1/R^n series
    Validity,
    /// Energy shifts between N_max = N*+2, N*+4 and N*+6
    Converge {
        #[arg(long = "n-star", value_name = "INT")]
        n_star: u32,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::resolve(&cli.flags)?;
    let ctx = Context::load(config)?;
    let out = match cli.command {
        Command::Curves => commands::cmd_curves(&ctx)?,
        Command::Crossings => commands::cmd_crossings(&ctx)?,
        Command::Validity => commands::cmd_validity(&ctx)?,
        Command::Converge { n_star } => commands::cmd_converge(&ctx, n_star)?,
    };
    println!("wrote {} files to {}", out.written().len(), ctx.config.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
