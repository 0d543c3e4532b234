//! Command-line front-end for the two-channel scattering workbench.
//!
//! ```text
//! feshlab <bound|resonances|phase|compare> [--config FILE] [--method M]
//!         [--rotated BOOL] [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Method, Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "feshlab",
    version,
    about = "Bound states and Feshbach resonances of a two-channel model, by grid diagonalization and quantum-defect analysis"
)]
struct Cli {
    /// Flat key=value configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Engine selection: mfgh, qdt, or both.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Use the optimized (rotated) reference set: true or false.
    #[arg(long, global = true)]
    rotated: Option<bool>,
    /// Output directory for CSVs and reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound levels below the open threshold.
    Bound,
    /// Resonance positions and widths between the thresholds.
    Resonances,
    /// Scattering-phase scans in both representations.
    Phase,
    /// Cross-method comparison report.
    Compare,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    let method = match &cli.method {
        Some(s) => Some(Method::parse(s).map_err(CliError::Config)?),
        None => None,
    };
    cfg.apply(&Overrides {
        method,
        rotated: cli.rotated,
        out: cli.out.clone(),
    });
    cfg.validate().map_err(CliError::Config)?;

    match cli.command {
        Command::Bound => commands::cmd_bound(&cfg),
        Command::Resonances => commands::cmd_resonances(&cfg),
        Command::Phase => commands::cmd_phase(&cfg),
        Command::Compare => commands::cmd_compare(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("feshlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
