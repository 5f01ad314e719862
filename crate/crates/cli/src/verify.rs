use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use revivalkit::bivariate::{
    generating_function_check, hermitian_relation_residual, tratnik_recurrence_residual, verify_seven_term, Rotation3,
    TratnikParams, SEVEN_TERM_CAP,
};
use revivalkit::combinatorics::triangle_points;
use revivalkit::hamming::{self, krawtchouk_eigenvalue_check, projection_equivalence, verify_bose_mesner};
use revivalkit::ordered::{
    self, column_cardinality, project_ordered_walk, spectral_check, triangle_hamiltonian, verify_ordered_bose_mesner,
    words_of_shape, AmplitudeGrid, Shape,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{emit, envelope, to_json};
use crate::CliError;

const CLOSED_FORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Hamming,
    Ordered,
    Bivariate,
}

impl Target {
    fn cap(self) -> usize {
        match self {
            Target::Hamming => hamming::BOSE_MESNER_CAP.min(hamming::PROJECTION_CAP),
            Target::Ordered => ordered::BOSE_MESNER_CAP.min(ordered::WALK_CAP),
            Target::Bivariate => SEVEN_TERM_CAP,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub target: Target,
    #[arg(long)]
    pub n: usize,
    /// Seeds the random times, couplings and rotations.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random rotations for the bivariate suite.
    #[arg(long, default_value_t = 4)]
    pub rotations: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub report: Value,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, residual: f64, report: impl Serialize) -> Self {
        Self { name: name.into(), passed, residual, report: serde_json::to_value(report).expect("serializable") }
    }
}

fn hamming_suite(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let bm = verify_bose_mesner(n)?;
    let ev = krawtchouk_eigenvalue_check(n)?;
    let mut checks = vec![
        Check::new("bose_mesner", bm.passed, bm.max_deviation, &bm),
        Check::new("krawtchouk_eigenvalues", ev.passed, ev.max_deviation, &ev),
    ];
    let times: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..3.0)).collect();
    let reports: Vec<_> = times.par_iter().map(|&t| projection_equivalence(n, t)).collect::<revivalkit::Result<_>>()?;
    for r in reports {
        checks.push(Check::new(format!("projection t={}", r.time), r.passed, r.max_deviation, &r));
    }
    Ok(checks)
}

fn ordered_suite(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let bm = verify_ordered_bose_mesner(n)?;
    let mut checks = vec![Check::new("bose_mesner", bm.passed, bm.max_deviation, &bm)];

    let mut wrong = Vec::new();
    for (i, j) in triangle_points(n) {
        let k = column_cardinality(n, i, j)?;
        let count = words_of_shape(n, Shape::new(i, j)).len() as u64;
        if k != count {
            wrong.push(json!({"shape": [i, j], "formula": k, "count": count}));
        }
    }
    checks.push(Check::new("column_cardinalities", wrong.is_empty(), wrong.len() as f64, json!({"mismatches": wrong})));

    let alpha = rng.gen_range(0.5..2.0);
    let beta = rng.gen_range(0.5..2.0);
    let times: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..3.0)).collect();
    let op = triangle_hamiltonian(n, alpha, beta)?;
    let sc = spectral_check(&op)?;
    checks.push(Check::new(
        format!("spectrum alpha={alpha} beta={beta}"),
        sc.passed,
        sc.eigenvalue_deviation.max(sc.projector_deviation),
        &sc,
    ));
    let walks: Vec<_> =
        times.par_iter().map(|&t| project_ordered_walk(n, alpha, beta, t)).collect::<revivalkit::Result<_>>()?;
    for r in walks {
        checks.push(Check::new(format!("projection t={}", r.time), r.passed, r.max_deviation, &r));
    }
    let evolved = AmplitudeGrid::evolved(&op, &times);
    let closed = AmplitudeGrid::closed_form(n, alpha, beta, &times)?;
    let dev = evolved.values.iter().zip(&closed.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    checks.push(Check::new("closed_form", dev <= CLOSED_FORM_TOL, dev, json!({"times": times, "max_deviation": dev})));
    Ok(checks)
}

fn bivariate_suite(n: usize, rotations: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let rs: Vec<Rotation3> = (0..rotations).map(|_| Rotation3::random(rng)).collect();
    let p = rng.gen_range(0.1..0.6);
    let q = rng.gen_range(0.1..(0.9 - p));
    let alpha = rng.gen_range(0.5..2.0);
    let beta = rng.gen_range(0.5..2.0);

    let seven: Vec<_> = rs.par_iter().map(|r| verify_seven_term(r, n)).collect::<revivalkit::Result<_>>()?;
    let mut checks: Vec<Check> = seven
        .iter()
        .zip(&rs)
        .enumerate()
        .map(|(k, (s, r))| Check::new(format!("seven_term rotation {k}"), s.passed, s.max_residual, json!({"rotation": r, "result": s})))
        .collect();
    for params in [TratnikParams::scheme(n)?, TratnikParams::new(n, p, q)?] {
        let r = tratnik_recurrence_residual(&params)?;
        checks.push(Check::new(format!("tratnik_recurrences p={} q={}", params.p, params.q), r.passed, r.max_residual, &r));
        for idx in [(0, 0), (1, 0), (0, 1), (n / 2, n - n / 2)] {
            let g = generating_function_check(&params, idx, 0.3, -0.2)?;
            checks.push(Check::new(
                format!("generating_function p={} q={} index=({}, {})", params.p, params.q, idx.0, idx.1),
                g.passed,
                g.relative_residual,
                &g,
            ));
        }
    }
    let h = hermitian_relation_residual(n, alpha, beta)?;
    checks.push(Check::new(format!("lattice_relation alpha={alpha} beta={beta}"), h.passed, h.max_residual, &h));
    Ok(checks)
}

pub fn verify(a: &VerifyArgs) -> Result<Vec<Check>, CliError> {
    let cap = a.target.cap();
    if a.n == 0 || a.n > cap {
        return Err(CliError::Usage(format!("N = {} outside 1..={cap} (cap for {:?})", a.n, a.target).to_lowercase()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    match a.target {
        Target::Hamming => hamming_suite(a.n, &mut rng),
        Target::Ordered => ordered_suite(a.n, &mut rng),
        Target::Bivariate => bivariate_suite(a.n, a.rotations.max(1), &mut rng),
    }
}

pub fn run(a: VerifyArgs) -> Result<(), CliError> {
    let checks = verify(&a)?;
    let passed = checks.iter().all(|c| c.passed);
    let worst = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let body = json!({"passed": passed, "max_residual": worst, "checks": checks});
    emit(&to_json(&envelope("verify", &a, body)), a.output.as_deref())?;
    if !passed {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(CliError::Invariant(format!("failed checks: {}", failed.join(", "))));
    }
    Ok(())
}
