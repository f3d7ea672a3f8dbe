//! `sphmax`: reproducible experiment runs over the sphmax-core library.

mod artifacts;
mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("{0}")]
    Core(#[from] sphmax_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// The run finished but some checks failed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use sphmax_core::Error as E;
        match self {
            CliError::Config { .. } => 3,
            CliError::Core(E::Parameter(_) | E::Domain(_) | E::Configuration(_) | E::Format(_)) => 3,
            CliError::Core(E::Resource(_)) => 4,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sphmax", version, about = "Spherical averages and maximal operators on fractal measures")]
pub struct Cli {
    /// JSON config with an `experiment` field naming the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "sphmax-out")]
    pub out: PathBuf,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Smaller battery for `suite`.
    #[arg(long, global = true)]
    pub quick: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Build a measure, export it and fit its growth exponent.
    GenMeasure,
    /// Fourier transform of fμ on a grid, with a decay fit.
    Fourier,
    /// Localized Fourier energies r^{-(d-s)} ∫_{|ξ|≤r} |f̂μ|².
    Strichartz,
    /// Spherical average A_t f.
    Avg,
    /// Single-scale maximal function over t in [1, 2].
    Maximal,
    /// Empirical operator-norm lower bound.
    Opnorm,
    /// Growth exponent of dyadic norms.
    Growth,
    /// Exponent thresholds, intervals and blowup bounds.
    Exponents,
    /// Extremal constructions and divergence probes.
    Counterexample,
    /// 3D wave equation with measure data.
    Wave,
    /// The acceptance battery.
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GenMeasure => "gen-measure",
            Command::Fourier => "fourier",
            Command::Strichartz => "strichartz",
            Command::Avg => "avg",
            Command::Maximal => "maximal",
            Command::Opnorm => "opnorm",
            Command::Growth => "growth",
            Command::Exponents => "exponents",
            Command::Counterexample => "counterexample",
            Command::Wave => "wave",
            Command::Suite => "suite",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("sphmax: cannot size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match experiments::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sphmax {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
