//! `geoqrypt` command-line front end.

mod commands;
mod config;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use commands::{execute, Command, RunConfig};
use config::Config;

/// Environment variable capping worker threads; 0 or unset means automatic.
const THREADS_ENV: &str = "GEOQRYPT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "geoqrypt", version, about = "Quantum geo-encryption simulator")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn threads() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| CliError::config(format!("{THREADS_ENV} must be a non-negative integer"))),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", cli.config.display())))?;
    let run = RunConfig::from_config(&Config::parse(&text)?, cli.command, cli.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads()?)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let output = pool.install(|| execute(&run))?;
    match &cli.out {
        Some(path) => std::fs::write(path, output)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{output}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geoqrypt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
