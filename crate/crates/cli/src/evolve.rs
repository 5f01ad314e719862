use std::path::PathBuf;

use clap::{ArgGroup, Args, ValueEnum};
use rayon::prelude::*;
use revivalkit::combinatorics::triangle_points;
use revivalkit::dynamics::ChainEvolution;
use revivalkit::ordered::{detect_2d_transfer, triangle_hamiltonian, AmplitudeGrid};
use revivalkit::orthopoly::{krawtchouk_chain, para_krawtchouk_chain, ParaKrawtchoukParams, RecurrenceCoefficients};
use revivalkit::C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output::{emit, envelope, to_json, AmplitudeTable, Format};
use crate::time::{parse_list, parse_range, parse_time};
use crate::CliError;

/// Largest triangle handled by dense diagonalization here.
pub const TRIANGLE_CAP: usize = 64;

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct TimeArgs {
    /// Comma-separated times, e.g. "pi/6,pi/4,0.5".
    #[arg(long)]
    pub times: Option<String>,
    /// start:stop:step with endpoints included, e.g. "0:pi:pi/64".
    #[arg(long)]
    pub range: Option<String>,
}

impl TimeArgs {
    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let times = match (&self.times, &self.range) {
            (Some(list), None) => parse_list(list),
            (None, Some(range)) => parse_range(range),
            _ => Err("give exactly one of --times or --range".to_string()),
        }
        .map_err(CliError::Usage)?;
        if times.is_empty() {
            return Err(CliError::Usage("time list is empty".into()));
        }
        Ok(times)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Allowed |Σ|f|² - 1| per row before exiting with status 3.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("chain").required(true).args(["krawtchouk", "para", "couplings", "chain_file"])))]
pub struct EvolveArgs {
    /// Krawtchouk chain with N+1 sites.
    #[arg(long, value_name = "N")]
    pub krawtchouk: Option<usize>,
    /// Para-Krawtchouk chain with N+1 sites (needs --delta).
    #[arg(long, value_name = "N", requires = "delta")]
    pub para: Option<usize>,
    /// Explicit couplings J_1..J_N, comma-separated.
    #[arg(long)]
    pub couplings: Option<String>,
    /// Fields B_0..B_N for --couplings; zero when omitted.
    #[arg(long, requires = "couplings")]
    pub fields: Option<String>,
    /// JSON with "couplings" and optional "fields", or a `design` output.
    #[arg(long)]
    pub chain_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub source: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Deserialize)]
struct ChainFile {
    couplings: Vec<f64>,
    fields: Option<Vec<f64>>,
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad {what} entry {v:?}"))))
        .collect()
}

fn with_fields(couplings: Vec<f64>, fields: Option<Vec<f64>>) -> Result<RecurrenceCoefficients, CliError> {
    Ok(match fields {
        Some(f) => RecurrenceCoefficients::new(couplings, f)?,
        None => RecurrenceCoefficients::from_couplings(couplings)?,
    })
}

fn build_chain(a: &EvolveArgs) -> Result<RecurrenceCoefficients, CliError> {
    if let Some(n) = a.krawtchouk {
        return Ok(krawtchouk_chain(n, a.beta)?);
    }
    if let Some(n) = a.para {
        let delta = a.delta.expect("clap enforces --delta");
        return Ok(para_krawtchouk_chain(&ParaKrawtchoukParams::new(n, a.beta, delta)?)?);
    }
    if let Some(j) = &a.couplings {
        let fields = a.fields.as_deref().map(|f| numbers(f, "field")).transpose()?;
        return with_fields(numbers(j, "coupling")?, fields);
    }
    let path = a.chain_file.as_ref().expect("clap enforces a chain source");
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("{}: {e}", path.display()));
    let mut value: Value = serde_json::from_str(&text).map_err(bad)?;
    if let Some(chain) = value.get_mut("chain") {
        value = chain.take();
    }
    let file: ChainFile = serde_json::from_value(value).map_err(bad)?;
    with_fields(file.couplings, file.fields)
}

fn finish(command: &str, config: &impl Serialize, table: AmplitudeTable, out: &OutputArgs, extra: Value) -> Result<(), CliError> {
    let norms = table.norms();
    let worst = norms.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let text = match out.format {
        Format::Csv => table.csv(),
        Format::Json => {
            let mut body = json!({"max_norm_deviation": worst, "rows": table.json_rows()});
            if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
                b.extend(e);
            }
            to_json(&envelope(command, config, body))
        }
    };
    emit(&text, out.output.as_deref())?;
    if worst > out.tol {
        let k = norms.iter().position(|s| (s - 1.0).abs() == worst).unwrap_or(0);
        return Err(CliError::Invariant(format!(
            "row at t={} has Σ|f|² = {} (deviation {worst:e} > tol {:e})",
            table.times[k], norms[k], out.tol
        )));
    }
    Ok(())
}

pub fn run_chain(a: EvolveArgs) -> Result<(), CliError> {
    let chain = build_chain(&a)?;
    let times = a.time.resolve()?;
    if a.source >= chain.n_sites() {
        return Err(CliError::Usage(format!("source site {} outside 0..{}", a.source, chain.n_sites())));
    }
    let evo = ChainEvolution::new(&chain);
    let rows: Vec<Vec<C64>> =
        times.par_iter().map(|&t| evo.amplitudes(t, a.source)).collect::<revivalkit::Result<_>>()?;
    let values: Vec<C64> = rows.concat();
    let labels: Vec<(usize, usize)> = (0..chain.n_sites()).map(|i| (i, 0)).collect();
    let table = AmplitudeTable { times: &times, labels: &labels, values: &values };
    finish("evolve", &a, table, &a.out, json!({}))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Diagonalize the lattice Hamiltonian.
    Evolved,
    /// Product formula for the amplitudes.
    ClosedForm,
}

#[derive(Debug, Args, Serialize)]
pub struct Amplitude2dArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = Method::Evolved)]
    pub method: Method,
    /// Also scan (0, T] for transfer and revival events (JSON only).
    #[arg(long, value_name = "T")]
    pub detect: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

pub fn run_triangle(a: Amplitude2dArgs) -> Result<(), CliError> {
    if a.n > TRIANGLE_CAP {
        return Err(CliError::Usage(format!("N = {} exceeds cap {TRIANGLE_CAP}", a.n)));
    }
    let times = a.time.resolve()?;
    let op = triangle_hamiltonian(a.n, a.alpha, a.beta)?;
    let grid = match a.method {
        Method::Evolved => AmplitudeGrid::evolved(&op, &times),
        Method::ClosedForm => AmplitudeGrid::closed_form(a.n, a.alpha, a.beta, &times)?,
    };
    let extra = match &a.detect {
        Some(t) => {
            let t_max = parse_time(t).map_err(CliError::Usage)?;
            let report = detect_2d_transfer(a.n, a.alpha, a.beta, t_max, a.out.tol)?;
            json!({"events": report.events})
        }
        None => json!({}),
    };
    let labels = triangle_points(a.n);
    let table = AmplitudeTable { times: &times, labels: &labels, values: &grid.values };
    finish("amplitude2d", &a, table, &a.out, extra)
}
