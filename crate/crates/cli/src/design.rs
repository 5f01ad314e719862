use std::path::PathBuf;

use clap::{Args, Subcommand};
use revivalkit::dynamics::eigendecompose;
use revivalkit::orthopoly::{krawtchouk_chain, para_krawtchouk_chain, ParaKrawtchoukParams, RecurrenceCoefficients};
use revivalkit::spectral::{check_fr_condition, mirror_symmetric, reconstruct_jacobi, Spectrum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{emit, envelope, to_json};
use crate::time::parse_time;
use crate::CliError;

const MIRROR_TOL: f64 = 1e-8;

#[derive(Debug, Args, Serialize)]
pub struct DesignArgs {
    #[command(subcommand)]
    #[serde(flatten)]
    pub source: DesignSource,
    /// Also test the revival condition at this time (decimal or pi/k).
    #[arg(long, global = true)]
    pub t: Option<String>,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DesignSource {
    /// Couplings J_n = (β/2)√(n(N+1-n)), PST at π/β.
    Krawtchouk {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Mirror-symmetric chain on a bilattice spectrum (odd N).
    Para {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Persymmetric chain for the spectrum in a JSON file: a bare array of
    /// eigenvalues or an object with a "spectrum" array.
    BilatticeFile { path: PathBuf },
}

fn read_spectrum(path: &PathBuf) -> Result<Spectrum, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |why: String| CliError::Usage(format!("{}: {why}", path.display()));
    let value: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let points = match &value {
        Value::Array(_) => &value,
        Value::Object(map) => map.get("spectrum").ok_or_else(|| bad("missing \"spectrum\" array".into()))?,
        _ => return Err(bad("expected an array of eigenvalues".into())),
    };
    let points: Vec<f64> = serde_json::from_value(points.clone()).map_err(|e| bad(e.to_string()))?;
    Ok(Spectrum::new(points)?)
}

fn spectrum_of(chain: &RecurrenceCoefficients) -> Result<Spectrum, CliError> {
    Ok(Spectrum::new(eigendecompose(chain).values)?)
}

pub fn design(args: &DesignArgs) -> Result<Value, CliError> {
    let (chain, spectrum) = match &args.source {
        DesignSource::Krawtchouk { n, beta } => {
            let chain = krawtchouk_chain(*n, *beta)?;
            let spec = spectrum_of(&chain)?;
            (chain, spec)
        }
        DesignSource::Para { n, beta, delta } => {
            let chain = para_krawtchouk_chain(&ParaKrawtchoukParams::new(*n, *beta, *delta)?)?;
            let spec = spectrum_of(&chain)?;
            (chain, spec)
        }
        DesignSource::BilatticeFile { path } => {
            let spec = read_spectrum(path)?;
            (reconstruct_jacobi(&spec)?, spec)
        }
    };
    let fr = match &args.t {
        Some(t) => {
            let t = parse_time(t).map_err(CliError::Usage)?;
            serde_json::to_value(check_fr_condition(&spectrum, t)?).expect("serializable")
        }
        None => Value::Null,
    };
    Ok(json!({
        "chain": {"couplings": chain.couplings(), "fields": chain.fields()},
        "spectrum": spectrum.points(),
        "mirror_symmetric": mirror_symmetric(&chain, MIRROR_TOL),
        "fr_certificate": fr,
    }))
}

pub fn run(args: DesignArgs) -> Result<(), CliError> {
    let body = design(&args)?;
    emit(&to_json(&envelope("design", &args, body)), args.output.as_deref())
}
