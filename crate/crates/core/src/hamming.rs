//! Binary Hamming scheme H(N,2): distance-class adjacency operators on
//! {0,1}^N applied matrix-free, Bose–Mesner and Krawtchouk eigenvalue
//! identities, and the projection of the hypercube walk onto its columns.

use std::ops::AddAssign;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::dynamics::evolve;
use crate::error::{invalid, Error, Result};
use crate::linalg::{XorOperator, C64};
use crate::orthopoly::{krawtchouk_eval, KrawtchoukParams, RecurrenceCoefficients};

/// Largest N for which full 2^N vectors are built.
pub const FULL_SPACE_CAP: usize = 20;
pub const BOSE_MESNER_CAP: usize = 10;
pub const PROJECTION_CAP: usize = 14;

/// A vertex of the N-cube, bits packed into an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeVertex(pub usize);

impl CubeVertex {
    pub fn weight(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn distance(self, other: CubeVertex) -> usize {
        (self.0 ^ other.0).count_ones() as usize
    }
}

/// All N-bit words of Hamming weight `weight`, in increasing order.
pub fn words_of_weight(n: usize, weight: usize) -> Vec<usize> {
    if weight > n {
        return Vec::new();
    }
    if weight == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(n as u64, weight as u64) as usize);
    let mut w: usize = (1 << weight) - 1;
    let limit = 1usize << n;
    while w < limit {
        out.push(w);
        // next word with the same popcount
        let c = w & w.wrapping_neg();
        let r = w + c;
        w = (((r ^ w) >> 2) / c) | r;
    }
    out
}

fn check_cube(n: usize, len: usize) -> Result<()> {
    if n > FULL_SPACE_CAP {
        return Err(Error::CapExceeded { what: "hypercube dimension", value: n, cap: FULL_SPACE_CAP });
    }
    if len != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, actual: len });
    }
    Ok(())
}

/// (A_i v)_x = Σ_{d(x,y)=i} v_y. Only nonzero entries of `v` are visited,
/// so sparse inputs such as indicators are cheap.
pub fn adjacency_apply<T>(n: usize, relation: usize, v: &[T]) -> Result<Vec<T>>
where
    T: Copy + Default + PartialEq + AddAssign,
{
    check_cube(n, v.len())?;
    let mut out = vec![T::default(); v.len()];
    if relation > n {
        return Ok(out);
    }
    let masks = words_of_weight(n, relation);
    let zero = T::default();
    for (y, &vy) in v.iter().enumerate() {
        if vy == zero {
            continue;
        }
        for &m in &masks {
            out[y ^ m] += vy;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub checks: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

/// A_1 A_i = (i+1) A_{i+1} + (N-i+1) A_{i-1} on every indicator vector, in
/// exact integer arithmetic. Out-of-range classes are zero.
pub fn verify_bose_mesner(n: usize) -> Result<IdentityReport> {
    if n == 0 || n > BOSE_MESNER_CAP {
        return Err(Error::CapExceeded { what: "Bose-Mesner check", value: n, cap: BOSE_MESNER_CAP });
    }
    let dim = 1usize << n;
    let worst = (0..dim)
        .into_par_iter()
        .map(|y| {
            let mut e = vec![0i64; dim];
            e[y] = 1;
            let mut worst = 0i64;
            for i in 0..=n {
                let ai = adjacency_apply(n, i, &e).expect("dimension checked");
                let lhs = adjacency_apply(n, 1, &ai).expect("dimension checked");
                let up = adjacency_apply(n, i + 1, &e).expect("dimension checked");
                let down = if i == 0 { vec![0; dim] } else { adjacency_apply(n, i - 1, &e).expect("dimension checked") };
                let (cu, cd) = ((i + 1) as i64, (n + 1 - i) as i64);
                for x in 0..dim {
                    worst = worst.max((lhs[x] - cu * up[x] - cd * down[x]).abs());
                }
            }
            worst
        })
        .max()
        .unwrap_or(0);
    Ok(IdentityReport { n, checks: dim * (n + 1), max_deviation: worst as f64, passed: worst == 0 })
}

/// Builds a generic vector in the λ_s = N-2s eigenspace of A_1 (a mix of the
/// characters (-1)^{a·x} with |a| = s), confirms the A_1 eigenvalue, and checks
/// A_i v = C(N,i) K_i(s; ½) v for every i.
pub fn krawtchouk_eigenvalue_check(n: usize) -> Result<IdentityReport> {
    if n == 0 || n > BOSE_MESNER_CAP {
        return Err(Error::CapExceeded { what: "eigenvalue check", value: n, cap: BOSE_MESNER_CAP });
    }
    let dim = 1usize << n;
    let params = KrawtchoukParams::new(n, 0.5)?;
    let residuals: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|s| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            for (k, a) in words_of_weight(n, s).into_iter().enumerate() {
                let coeff = C64::new((1.0 + k as f64).cos(), (0.5 + 2.0 * k as f64).sin());
                for (x, vx) in v.iter_mut().enumerate() {
                    let sign = if (a & x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    *vx += coeff * sign;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut worst = residual(&adjacency_apply(n, 1, &v).unwrap(), &v, n as f64 - 2.0 * s as f64) / norm;
            for i in 0..=n {
                let eig = binomial(n as u64, i as u64) as f64 * krawtchouk_eval(i, s as f64, &params).unwrap();
                let av = adjacency_apply(n, i, &v).unwrap();
                worst = worst.max(residual(&av, &v, eig) / norm);
            }
            worst
        })
        .collect();
    let max = residuals.into_iter().fold(0.0, f64::max);
    Ok(IdentityReport { n, checks: (n + 1) * (n + 2), max_deviation: max, passed: max < 1e-8 })
}

fn residual(av: &[C64], v: &[C64], lambda: f64) -> f64 {
    av.iter().zip(v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt()
}

/// Quotient chain of A_1 on the column vectors: J_n = √(n(N-n+1)), B_n = 0.
pub fn project_hypercube(n: usize) -> Result<RecurrenceCoefficients> {
    if n == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    RecurrenceCoefficients::from_couplings((1..=n).map(|k| ((k * (n - k + 1)) as f64).sqrt()).collect())
}

/// Walk exp(-itA_1) on the full cube from vertex 0.
pub fn hypercube_walk(n: usize, t: f64) -> Result<Vec<C64>> {
    if n == 0 || n > FULL_SPACE_CAP {
        return Err(Error::CapExceeded { what: "hypercube dimension", value: n, cap: FULL_SPACE_CAP });
    }
    let op = XorOperator { dim: 1 << n, terms: (0..n).map(|b| (1usize << b, 1.0)).collect() };
    let mut psi = vec![C64::new(0.0, 0.0); 1 << n];
    psi[0] = C64::new(1.0, 0.0);
    Ok(op.evolve(&psi, t))
}

/// Amplitudes on |col n> = k_n^{-1/2} Σ_{|x|=n} |x>, and the norm of the
/// part of `psi` orthogonal to the column space.
pub fn column_projection(n: usize, psi: &[C64]) -> (Vec<C64>, f64) {
    let mut sums = vec![C64::new(0.0, 0.0); n + 1];
    for (x, a) in psi.iter().enumerate() {
        sums[x.count_ones() as usize] += a;
    }
    let sizes: Vec<f64> = (0..=n).map(|k| binomial(n as u64, k as u64) as f64).collect();
    let off: f64 = psi
        .iter()
        .enumerate()
        .map(|(x, a)| {
            let k = x.count_ones() as usize;
            (a - sums[k] / sizes[k]).norm_sqr()
        })
        .sum();
    let cols = sums.iter().zip(&sizes).map(|(s, k)| s / k.sqrt()).collect();
    (cols, off.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub n: usize,
    pub time: f64,
    /// max |<col k|ψ(t)> - <e_k|U_chain(t)|e_0>| over columns
    pub max_deviation: f64,
    /// norm of the full-space state orthogonal to the column space
    pub off_column_norm: f64,
    pub passed: bool,
}

/// Full-space walk on the cube versus the quotient chain.
pub fn projection_equivalence(n: usize, t: f64) -> Result<ProjectionReport> {
    if n == 0 || n > PROJECTION_CAP {
        return Err(Error::CapExceeded { what: "projection check", value: n, cap: PROJECTION_CAP });
    }
    let psi = hypercube_walk(n, t)?;
    let (cols, off) = column_projection(n, &psi);
    let chain = evolve(&project_hypercube(n)?, t, 0)?;
    let dev = cols.iter().zip(&chain).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(ProjectionReport { n, time: t, max_deviation: dev, off_column_norm: off, passed: dev < 1e-9 && off < 1e-9 })
}
