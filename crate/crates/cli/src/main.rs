mod design;
mod evolve;
mod output;
mod time;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "revivalkit", version, about = "Design and simulate spin chains and lattices with perfect state transfer and fractional revival")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a chain from a known family or a spectrum file.
    Design(design::DesignArgs),
    /// Evolve a single excitation along a chain.
    Evolve(evolve::EvolveArgs),
    /// Run an invariant suite.
    Verify(verify::VerifyArgs),
    /// Amplitudes on the triangular lattice from the apex.
    Amplitude2d(evolve::Amplitude2dArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] revivalkit::Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Io(_) => 1,
            CliError::Invariant(_) => 3,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("REVIVALKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("REVIVALKIT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Design(a) => design::run(a),
        Command::Evolve(a) => evolve::run_chain(a),
        Command::Verify(a) => verify::run(a),
        Command::Amplitude2d(a) => evolve::run_triangle(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("revivalkit: {e}");
            ExitCode::from(e.code())
        }
    }
}
