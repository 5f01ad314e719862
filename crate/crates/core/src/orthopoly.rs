//! Univariate Krawtchouk and para-Krawtchouk families and generic
//! three-term recurrence evaluation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest chain degree N accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 64;

/// Couplings J_1..J_N and fields B_0..B_N of a Jacobi matrix, i.e. the
/// one-excitation Hamiltonian of an XX spin chain with N+1 sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCoefficients {
    couplings: Vec<f64>,
    fields: Vec<f64>,
}

impl RecurrenceCoefficients {
    pub fn new(couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        if fields.len() < 2 {
            return Err(invalid("fields", "a chain needs at least two sites"));
        }
        if couplings.len() + 1 != fields.len() {
            return Err(Error::DimensionMismatch {
                expected: fields.len() - 1,
                actual: couplings.len(),
            });
        }
        if couplings.len() > MAX_DEGREE {
            return Err(Error::CapExceeded { what: "chain degree", value: couplings.len(), cap: MAX_DEGREE });
        }
        if let Some(n) = couplings.iter().position(|j| !(j.is_finite() && *j > 0.0)) {
            return Err(invalid("couplings", format!("J_{} = {} must be positive", n + 1, couplings[n])));
        }
        if fields.iter().any(|b| !b.is_finite()) {
            return Err(invalid("fields", "non-finite entry"));
        }
        Ok(Self { couplings, fields })
    }

    /// Chain with zero fields.
    pub fn from_couplings(couplings: Vec<f64>) -> Result<Self> {
        let fields = vec![0.0; couplings.len() + 1];
        Self::new(couplings, fields)
    }

    pub fn n_sites(&self) -> usize {
        self.fields.len()
    }

    /// N, the index of the last site.
    pub fn degree(&self) -> usize {
        self.couplings.len()
    }

    /// J_1..J_N; `couplings()[n-1]` is J_n.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// B_0..B_N.
    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn jacobi_matrix(&self) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut m = DMatrix::zeros(n, n);
        for (k, &b) in self.fields.iter().enumerate() {
            m[(k, k)] = b;
        }
        for (k, &j) in self.couplings.iter().enumerate() {
            m[(k, k + 1)] = j;
            m[(k + 1, k)] = j;
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrawtchoukParams {
    pub n: usize,
    pub p: f64,
}

impl KrawtchoukParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n == 0 || n > MAX_DEGREE {
            return Err(invalid("N", format!("must be in 1..={MAX_DEGREE}, got {n}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("p", format!("must lie in (0,1), got {p}")));
        }
        Ok(Self { n, p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParaKrawtchoukParams {
    pub n: usize,
    pub beta: f64,
    pub delta: f64,
}

impl ParaKrawtchoukParams {
    pub fn new(n: usize, beta: f64, delta: f64) -> Result<Self> {
        if n % 2 == 0 || n > MAX_DEGREE {
            return Err(invalid("N", format!("closed form needs odd N ≤ {MAX_DEGREE}, got {n}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive, got {beta}")));
        }
        if !(delta > 0.0 && delta < 2.0) {
            return Err(invalid("delta", format!("must lie in (0,2), got {delta}")));
        }
        Ok(Self { n, beta, delta })
    }
}

/// K_n^N(x; p) = 2F1(-n, -x; -N; 1/p) as a terminating sum.
pub fn krawtchouk_eval(n: usize, x: f64, params: &KrawtchoukParams) -> Result<f64> {
    if n > params.n {
        return Err(Error::DegreeOutOfRange { degree: n, max: params.n });
    }
    Ok(krawtchouk_sum(n, x, params.n as f64, params.p))
}

/// Terminating 2F1(-n, -x; -cap; 1/p) with running-product term updates.
/// `cap` must not be a non-negative integer smaller than n.
pub(crate) fn krawtchouk_sum(n: usize, x: f64, cap: f64, p: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (kf - n as f64) * (kf - x) / ((kf + 1.0) * (kf - cap) * p);
        if term == 0.0 {
            break;
        }
        sum += term;
    }
    sum
}

/// Krawtchouk chain: J_n = β√(n(N+1-n))/2, B_n = 0.
pub fn krawtchouk_chain(n: usize, beta: f64) -> Result<RecurrenceCoefficients> {
    if n == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    let couplings = (1..=n)
        .map(|k| beta * ((k * (n + 1 - k)) as f64).sqrt() / 2.0)
        .collect();
    RecurrenceCoefficients::from_couplings(couplings)
}

/// Para-Krawtchouk chain for odd N from the closed-form couplings.
/// Even N has no closed form here; reconstruct it from
/// [`crate::spectral::bilattice_spectrum`] instead.
pub fn para_krawtchouk_chain(params: &ParaKrawtchoukParams) -> Result<RecurrenceCoefficients> {
    let n = params.n as f64;
    let d2 = params.delta * params.delta;
    let mut couplings = Vec::with_capacity(params.n);
    for k in 1..=params.n {
        let kf = k as f64;
        let a = n + 1.0 - 2.0 * kf;
        let sq = kf * (n + 1.0 - kf) * (a * a - d2) / ((n - 2.0 * kf) * (n - 2.0 * kf + 2.0));
        if !(sq > 0.0) {
            return Err(Error::Infeasible { index: k, value: sq });
        }
        couplings.push(params.beta / 2.0 * sq.sqrt());
    }
    RecurrenceCoefficients::from_couplings(couplings)
}

/// Orthonormal polynomial values χ_0(x)..χ_N(x) from the forward recurrence
/// x χ_n = J_{n+1} χ_{n+1} + B_n χ_n + J_n χ_{n-1}.
pub fn evaluate_chi(coeffs: &RecurrenceCoefficients, x: f64) -> Vec<f64> {
    let j = coeffs.couplings();
    let b = coeffs.fields();
    let mut chi = Vec::with_capacity(coeffs.n_sites());
    chi.push(1.0);
    let mut prev = 0.0;
    for n in 0..coeffs.degree() {
        let back = if n == 0 { 0.0 } else { j[n - 1] * prev };
        let next = ((x - b[n]) * chi[n] - back) / j[n];
        prev = chi[n];
        chi.push(next);
    }
    chi
}
