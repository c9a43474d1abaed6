//! Batch front end for `pgate-core`: JSON run configuration, subcommand
//! dispatch and CSV/JSON artifact emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::ValueEnum;

pub use config::RunConfig;
pub use error::{CliError, ErrorKind};
pub use output::{Artifacts, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Profile,
    Modes,
    Gate,
    Parity,
    Budget,
    Stark,
    Scan,
    Tones,
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match command {
        Command::Profile => commands::profile(cfg),
        Command::Modes => commands::modes(cfg),
        Command::Gate => commands::gate(cfg),
        Command::Parity => commands::parity(cfg),
        Command::Budget => commands::budget(cfg),
        Command::Stark => commands::stark(cfg),
        Command::Scan => commands::scan(cfg),
        Command::Tones => commands::tones(cfg),
    }
}

/// Load the config (defaults when `config` is `None`), apply the seed
/// override, run `command` and write its artifacts under `out`.
pub fn run(
    command: Command,
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    format: Format,
) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let artifacts = run_command(command, &cfg)?;
    output::write(out, &artifacts, format, &cfg.sha256())
}
