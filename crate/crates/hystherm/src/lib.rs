//! Std companion of `hystherm-core`: JSON experiment configs, field CSV
//! files, and the `hystherm` command line.

pub mod commands;
pub mod config;
pub mod error;
pub mod fieldio;
pub mod random;

use std::path::PathBuf;

pub use commands::{run, Command, Mode, Summary};
pub use config::{parse_config, ExperimentConfig};
pub use error::{CliError, FieldError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HYSTHERM_THREADS";

#[derive(Debug, Clone, clap::Parser)]
#[command(name = "hystherm", version, about = "Heat equation with play hysteresis: simulation and verification")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Derivative used by `first-order` and `verify`.
    #[arg(long, value_enum, default_value_t = Mode::Bouligand)]
    pub mode: Mode,
    /// Overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Worker count from `HYSTHERM_THREADS`; `None` leaves rayon's default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Environment(format!("{THREADS_ENV}: {e}"))),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Environment(format!(
                "{THREADS_ENV} must be a positive integer, got `{s}`"
            ))),
        },
    }
}

pub fn execute(cli: &Cli) -> Result<Summary> {
    let mut cfg = parse_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Environment(format!("thread pool: {e}")))?;
    pool.install(|| run(cli.command, &cfg, cli.mode, &cli.out))
}
