//! `krein`: batch front end for C-symmetry computations in finite-dimensional
//! Krein spaces. Reports are JSON on stdout or `--out`; errors are a JSON
//! object on stderr with exit code 2 for invalid input and 1 for internal
//! failures.

mod commands;
mod config;
mod error;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::{Command, Context};
use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(name = "krein", version, about = "C-symmetry toolkit for finite-dimensional Krein spaces")]
struct Cli {
    /// Numerical tolerance; overrides KREIN_TOL and the config file.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with defaults for any of the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let config = Config::load(cli.config.as_deref())?;
    let ctx = Context {
        tol: config.tolerance(cli.tol)?,
        seed: config.seed(cli.seed),
        config,
    };
    commands::run(cli.command, &ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", json!({ "error": err }));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
