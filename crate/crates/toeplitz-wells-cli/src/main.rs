//! `toeplitz-wells`: spectral experiments on magnetic torus operators.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use toeplitz_wells_cli::config::{self, ExperimentKind};
use toeplitz_wells_cli::runner::{self, RunOptions};

#[derive(Parser)]
#[command(
    name = "toeplitz-wells",
    version,
    about = "Spectral experiments for magnetic Laplacians and Toeplitz operators on the torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output directory; defaults to the config's `out_dir`, then the
    /// TOEPLITZ_WELLS_OUT environment variable, then `<experiment>-out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for the parallel solves.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,

    /// Replace the grid rule with a fixed lattice of N sites per side.
    #[arg(long, value_name = "N")]
    grid_override: Option<usize>,

    /// Suppress the verdict summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and truncated spectra of a quadratic model well.
    ModelSpectrum(CommonArgs),
    /// Landau clusters of the constant-field Bochner Laplacian.
    LandauLevels(CommonArgs),
    /// Low Toeplitz eigenvalues against the model well spectrum.
    ToeplitzSpectrum(CommonArgs),
    /// Bochner eigenvalue sweep over p with Richardson control.
    BochnerSweep(CommonArgs),
    /// Toeplitz eigenvalue sweep over p with Richardson control.
    ToeplitzSweep(CommonArgs),
    /// Eigensection concentration near the symbol wells.
    Localization(CommonArgs),
    /// Product and commutator defects of the compressed symbol algebra.
    AlgebraDefects(CommonArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, CommonArgs) {
        match self {
            Command::ModelSpectrum(a) => (ExperimentKind::ModelSpectrum, a),
            Command::LandauLevels(a) => (ExperimentKind::LandauLevels, a),
            Command::ToeplitzSpectrum(a) => (ExperimentKind::ToeplitzSpectrum, a),
            Command::BochnerSweep(a) => (ExperimentKind::BochnerSweep, a),
            Command::ToeplitzSweep(a) => (ExperimentKind::ToeplitzSweep, a),
            Command::Localization(a) => (ExperimentKind::Localization, a),
            Command::AlgebraDefects(a) => (ExperimentKind::AlgebraDefects, a),
        }
    }
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();

    if let Some(jobs) = args.jobs {
        // A second initialization (tests, embedding) is harmless; the
        // existing pool wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    match run(kind, &args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(kind: ExperimentKind, args: &CommonArgs) -> toeplitz_wells_cli::error::Result<u8> {
    let raw = config::parse_config(&args.config)?;
    let resolved = config::resolve(kind, raw, args.grid_override)?;

    let out_dir = args
        .out
        .clone()
        .or_else(|| resolved.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("TOEPLITZ_WELLS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{kind}-out")));

    let outcome = runner::run(
        &resolved,
        &RunOptions {
            out_dir,
            quiet: args.quiet,
        },
    )?;
    Ok(outcome.exit_code)
}
