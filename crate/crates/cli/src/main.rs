use clap::{Args, Parser, Subcommand};
use hpscatter_cli::config::{Overrides, RunConfig};
use hpscatter_cli::{run, CliError, Command, THREADS_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

/// Direct solver for 2D Helmholtz scattering from smooth variable media.
///
/// Exit codes: 0 success, 2 configuration error, 3 resonance, 4 accuracy or
/// integration failure, 1 output I/O failure. Set HPSCATTER_THREADS to fix
/// the number of worker threads.
#[derive(Parser)]
#[command(name = "hpscatter", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build once, solve every incident direction, write probes, boundary data and grids.
    Solve(Common),
    /// Probe values and errors over a list of tree depths.
    Convergence(Common),
    /// Eigenvalues of the regularized and unregularized boundary operators.
    Spectrum(Common),
    /// Radial reference solution only (radially symmetric potentials).
    Reference(Common),
    /// Build and solve timings over a list of tree depths.
    Timing(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Tree depth, or a comma-separated ascending list for sweeps.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<usize>,
    /// Seed of the random-bumps potential.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow runs with seven or more levels.
    #[arg(long)]
    large: bool,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure {n} threads: {e}")))
}

fn main_inner(cli: Cli) -> Result<Vec<String>, CliError> {
    configure_threads()?;
    let (command, common) = match cli.command {
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Convergence(c) => (Command::Convergence, c),
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Reference(c) => (Command::Reference, c),
        Cmd::Timing(c) => (Command::Timing, c),
    };
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides { kappa: common.kappa, levels: common.levels, seed: common.seed, out: common.out, large: common.large });
    run(command, &cfg)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.remediation() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
