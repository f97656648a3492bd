//! Batch drivers behind the `hpscatter` binary.
//!
//! Each command reads a [`config::RunConfig`], writes CSV tables (and
//! optionally field rasters) into the configured output directory together
//! with the resolved configuration, and returns summary lines for the
//! terminal.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "HPSCATTER_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hpscatter::Error),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 configuration, 3 resonance, 4 accuracy or integration failure,
    /// 1 anything else (output I/O).
    pub fn exit_code(&self) -> i32 {
        use hpscatter::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Config(_) | E::UnknownPotential(_) | E::Domain(_)) => 2,
            CliError::Core(E::MergeResonance { .. } | E::DomainResonance { .. }) => 3,
            CliError::Core(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    /// Advice printed after the error message, if any.
    pub fn remediation(&self) -> Option<&'static str> {
        match self {
            CliError::Core(hpscatter::Error::MergeResonance { .. }) => {
                Some("a sub-box is resonant at this wavenumber; change kappa slightly or use a different number of levels")
            }
            CliError::Core(hpscatter::Error::DomainResonance { .. }) => {
                Some("change kappa slightly, or enlarge the computational box so kappa is no longer an interior eigenvalue")
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    Spectrum,
    Reference,
    Timing,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Convergence => "convergence",
            Command::Spectrum => "spectrum",
            Command::Reference => "reference",
            Command::Timing => "timing",
        }
    }
}

/// Validates the configuration and runs one command.
pub fn run(command: Command, cfg: &config::RunConfig) -> Result<Vec<String>, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out_dir.display())))?;
    let meta = format!(
        "# hpscatter {} `{}`; resolved configuration with all defaults\n{}",
        env!("CARGO_PKG_VERSION"),
        command.name(),
        cfg.to_toml()
    );
    std::fs::write(cfg.out_dir.join("config.toml"), meta).map_err(|e| CliError::Io(e.to_string()))?;
    match command {
        Command::Solve => commands::solve(cfg),
        Command::Convergence => commands::convergence(cfg),
        Command::Spectrum => commands::spectrum(cfg),
        Command::Reference => commands::reference(cfg),
        Command::Timing => commands::timing(cfg),
    }
}
