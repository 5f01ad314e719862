use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use revivalkit::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Wraps a command result with the tool name, version and the config echo.
pub fn envelope(command: &str, config: &impl Serialize, body: Value) -> Value {
    let mut doc = json!({
        "tool": "revivalkit",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    if let (Value::Object(out), Value::Object(body)) = (&mut doc, body) {
        out.extend(body);
    }
    doc
}

pub fn to_json(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("json values always serialize");
    s.push('\n');
    s
}

/// One amplitude row per time: sites in order with their labels.
pub struct AmplitudeTable<'a> {
    pub times: &'a [f64],
    pub labels: &'a [(usize, usize)],
    /// times.len() × labels.len(), row-major
    pub values: &'a [C64],
}

impl AmplitudeTable<'_> {
    fn row(&self, k: usize) -> &[C64] {
        let s = self.labels.len();
        &self.values[k * s..(k + 1) * s]
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.times.len()).map(|k| self.row(k).iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("time,i,j,re,im,abs2\n");
        for (k, &t) in self.times.iter().enumerate() {
            for (&(i, j), z) in self.labels.iter().zip(self.row(k)) {
                writeln!(out, "{t:?},{i},{j},{:?},{:?},{:?}", z.re, z.im, z.norm_sqr()).unwrap();
            }
        }
        out
    }

    pub fn json_rows(&self) -> Value {
        let norms = self.norms();
        let rows: Vec<Value> = self
            .times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let sites: Vec<Value> = self
                    .labels
                    .iter()
                    .zip(self.row(k))
                    .map(|(&(i, j), z)| json!({"i": i, "j": j, "re": z.re, "im": z.im, "abs2": z.norm_sqr()}))
                    .collect();
                json!({"time": t, "norm": norms[k], "sites": sites})
            })
            .collect();
        Value::Array(rows)
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
