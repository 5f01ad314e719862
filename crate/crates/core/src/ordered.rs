//! Ordered 2-Hamming scheme on N-tuples of bit pairs, its projection onto
//! the triangular lattice {(i, j): i + j ≤ N}, and two-dimensional transfer
//! detection on that lattice.

use std::ops::AddAssign;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bivariate::{orthonormal_eval, trinomial_weight, TratnikParams};
use crate::combinatorics::{multinomial, triangle_index, triangle_points};
use crate::error::{invalid, Error, Result};
use crate::hamming::{IdentityReport, ProjectionReport};
use crate::linalg::{bisect_maximum, peak_brackets, Propagator, XorOperator, C64};

/// Largest N for which 4^N vectors are built.
pub const FULL_SPACE_CAP: usize = 8;
pub const BOSE_MESNER_CAP: usize = 4;
pub const WALK_CAP: usize = 7;
pub const DETECT_GRID: usize = 8192;

const LOW_BITS: usize = 0x5555_5555_5555_5555;

/// A word of Q^(N,2). Pair j sits in bits 2j (first entry) and 2j+1 (second entry).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrderedWord(pub usize);

impl OrderedWord {
    pub fn from_pairs(pairs: &[(u8, u8)]) -> Self {
        let mut w = 0;
        for (j, &(a, b)) in pairs.iter().enumerate() {
            w |= ((a & 1) as usize) << (2 * j) | ((b & 1) as usize) << (2 * j + 1);
        }
        Self(w)
    }

    pub fn pair(self, j: usize) -> (u8, u8) {
        (((self.0 >> (2 * j)) & 1) as u8, ((self.0 >> (2 * j + 1)) & 1) as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub e1: usize,
    pub e2: usize,
}

impl Shape {
    pub const fn new(e1: usize, e2: usize) -> Self {
        Self { e1, e2 }
    }
}

/// e1 counts pairs (1,0); e2 counts pairs (0,1) and (1,1).
pub fn shape_of(x: OrderedWord) -> Shape {
    let low = x.0 & LOW_BITS;
    let high = (x.0 >> 1) & LOW_BITS;
    Shape { e1: (low & !high).count_ones() as usize, e2: high.count_ones() as usize }
}

pub fn related_under(x: OrderedWord, y: OrderedWord, e: Shape) -> bool {
    shape_of(OrderedWord(x.0 ^ y.0)) == e
}

/// k_{i,j} = multinomial(N; i, j) 2^j, the number of words of shape (i, j).
pub fn column_cardinality(n: usize, i: usize, j: usize) -> Result<u64> {
    if i + j > n {
        return Err(invalid("shape", format!("({i}, {j}) lies outside the triangle of size {n}")));
    }
    Ok(multinomial(n as u64, i as u64, j as u64) << j)
}

/// All words of the given shape, built pair by pair.
pub fn words_of_shape(n: usize, e: Shape) -> Vec<usize> {
    fn go(pos: usize, n: usize, e1: usize, e2: usize, word: usize, out: &mut Vec<usize>) {
        if e1 + e2 > n - pos {
            return;
        }
        if pos == n {
            out.push(word);
            return;
        }
        go(pos + 1, n, e1, e2, word, out);
        if e1 > 0 {
            go(pos + 1, n, e1 - 1, e2, word | 1 << (2 * pos), out);
        }
        if e2 > 0 {
            go(pos + 1, n, e1, e2 - 1, word | 2 << (2 * pos), out);
            go(pos + 1, n, e1, e2 - 1, word | 3 << (2 * pos), out);
        }
    }
    let mut out = Vec::new();
    if e.e1 + e.e2 <= n {
        go(0, n, e.e1, e.e2, 0, &mut out);
    }
    out
}

fn check_space(n: usize, len: usize) -> Result<()> {
    if n > FULL_SPACE_CAP {
        return Err(Error::CapExceeded { what: "ordered scheme size", value: n, cap: FULL_SPACE_CAP });
    }
    if len != 1 << (2 * n) {
        return Err(Error::DimensionMismatch { expected: 1 << (2 * n), actual: len });
    }
    Ok(())
}

/// (A_e v)_x = Σ_{y ∼_e x} v_y, scattering only the nonzero entries of `v`.
pub fn scheme_adjacency_apply<T>(n: usize, e: Shape, v: &[T]) -> Result<Vec<T>>
where
    T: Copy + Default + PartialEq + AddAssign,
{
    check_space(n, v.len())?;
    let mut out = vec![T::default(); v.len()];
    let diffs = words_of_shape(n, e);
    let zero = T::default();
    for (y, &vy) in v.iter().enumerate() {
        if vy == zero {
            continue;
        }
        for &d in &diffs {
            out[y ^ d] += vy;
        }
    }
    Ok(out)
}

/// Both product rules for A_(1,0) A_(i,j) and A_(0,1) A_(i,j), on every
/// indicator vector and every shape, in exact integer arithmetic.
pub fn verify_ordered_bose_mesner(n: usize) -> Result<IdentityReport> {
    if n == 0 || n > BOSE_MESNER_CAP {
        return Err(Error::CapExceeded { what: "ordered Bose-Mesner check", value: n, cap: BOSE_MESNER_CAP });
    }
    let dim = 1usize << (2 * n);
    let shapes = triangle_points(n);
    let worst = (0..dim)
        .into_par_iter()
        .map(|y| {
            let mut e = vec![0i64; dim];
            e[y] = 1;
            let a = |i: isize, j: isize, v: &[i64]| -> Vec<i64> {
                if i < 0 || j < 0 || (i + j) as usize > n {
                    return vec![0; dim];
                }
                scheme_adjacency_apply(n, Shape::new(i as usize, j as usize), v).expect("dimension checked")
            };
            let mut worst = 0i64;
            for &(i, j) in &shapes {
                let (ii, jj) = (i as isize, j as isize);
                let aij = a(ii, jj, &e);
                let rest = (n + 1 - i - j) as i64;
                let (fi, fj) = (i as i64, j as i64);

                let lhs = a(1, 0, &aij);
                let terms = [(rest, a(ii - 1, jj, &e)), (fj, aij.clone()), (fi + 1, a(ii + 1, jj, &e))];
                worst = worst.max(max_gap(&lhs, &terms));

                let lhs = a(0, 1, &aij);
                let terms = [
                    (2 * rest, a(ii, jj - 1, &e)),
                    (2 * (fi + 1), a(ii + 1, jj - 1, &e)),
                    (fj + 1, a(ii - 1, jj + 1, &e)),
                    (fj + 1, a(ii, jj + 1, &e)),
                ];
                worst = worst.max(max_gap(&lhs, &terms));
            }
            worst
        })
        .max()
        .unwrap_or(0);
    Ok(IdentityReport { n, checks: 2 * dim * shapes.len(), max_deviation: worst as f64, passed: worst == 0 })
}

fn max_gap(lhs: &[i64], terms: &[(i64, Vec<i64>)]) -> i64 {
    (0..lhs.len())
        .map(|x| (lhs[x] - terms.iter().map(|(c, v)| c * v[x]).sum::<i64>()).abs())
        .max()
        .unwrap_or(0)
}

/// Nonzero entries of column (i, j) of the triangle Hamiltonian, diagonal included.
pub fn triangle_neighbours(n: usize, alpha: f64, beta: f64, i: usize, j: usize) -> Vec<((usize, usize), f64)> {
    let rest = (n - i - j) as f64;
    let (fi, fj) = (i as f64, j as f64);
    let mut out = Vec::with_capacity(7);
    if j > 0 {
        out.push(((i, j), alpha * fj));
    }
    if i + j < n {
        out.push(((i + 1, j), alpha * ((fi + 1.0) * rest).sqrt()));
        out.push(((i, j + 1), beta * (2.0 * (fj + 1.0) * rest).sqrt()));
    }
    if i > 0 {
        out.push(((i - 1, j), alpha * (fi * (rest + 1.0)).sqrt()));
        out.push(((i - 1, j + 1), beta * (2.0 * fi * (fj + 1.0)).sqrt()));
    }
    if j > 0 {
        out.push(((i, j - 1), beta * (2.0 * fj * (rest + 1.0)).sqrt()));
        out.push(((i + 1, j - 1), beta * (2.0 * (fi + 1.0) * fj).sqrt()));
    }
    out
}

/// One-excitation Hamiltonian on the triangular lattice of size N, the
/// quotient of α A_(1,0) + β A_(0,1) by the shape columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleOperator {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

pub fn triangle_hamiltonian(n: usize, alpha: f64, beta: f64) -> Result<TriangleOperator> {
    if n == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(invalid("alpha, beta", "must be finite"));
    }
    Ok(TriangleOperator { n, alpha, beta })
}

impl TriangleOperator {
    pub fn sites(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut h = DMatrix::zeros(self.sites(), self.sites());
        for (i, j) in triangle_points(n) {
            let col = triangle_index(n, i, j);
            for ((a, b), c) in triangle_neighbours(n, self.alpha, self.beta, i, j) {
                h[(triangle_index(n, a, b), col)] += c;
            }
        }
        h
    }

    /// λ_{x,y} = α(N-2x) + β(2N-2x-4y) in triangle order.
    pub fn predicted_eigenvalues(&self) -> Vec<f64> {
        let n = self.n as f64;
        triangle_points(self.n)
            .into_iter()
            .map(|(x, y)| self.alpha * (n - 2.0 * x as f64) + self.beta * (2.0 * n - 2.0 * x as f64 - 4.0 * y as f64))
            .collect()
    }

    pub fn propagator(&self) -> Propagator {
        Propagator::from_symmetric(self.matrix())
    }

    /// Amplitudes <e_{i,j}| exp(-itH) |e_{0,0}> in triangle order.
    pub fn evolve_from_apex(&self, t: f64) -> Vec<C64> {
        self.propagator().amplitudes(t, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub eigenvalue_deviation: f64,
    /// max entry of the difference between numerical and predicted spectral projectors
    pub projector_deviation: f64,
    pub passed: bool,
}

/// Compares the numerical eigendecomposition with the predicted spectrum and
/// with eigenvectors Σ √w(x,y) P_{i,j}(x,y) |e_{i,j}). Eigenvalues closer than
/// 1e-7 are grouped and compared through their spectral projectors, which
/// makes the check insensitive to signs and to bases of degenerate subspaces.
pub fn spectral_check(op: &TriangleOperator) -> Result<SpectralReport> {
    let n = op.n;
    let dim = op.sites();
    let prop = op.propagator();
    let predicted = op.predicted_eigenvalues();
    let mut sorted = predicted.clone();
    sorted.sort_by(f64::total_cmp);
    let eig_dev = sorted.iter().zip(&prop.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let params = TratnikParams::scheme(n)?;
    let pts = triangle_points(n);
    let mut modes = DMatrix::<f64>::zeros(dim, dim);
    for (col, &(x, y)) in pts.iter().enumerate() {
        let w = trinomial_weight(&params, x, y)?.sqrt();
        for (row, &idx) in pts.iter().enumerate() {
            modes[(row, col)] = w * orthonormal_eval(n, idx, (x as f64, y as f64))?;
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| predicted[a].total_cmp(&predicted[b]));
    let mut proj_dev = 0.0f64;
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && prop.values[end] - prop.values[end - 1] < 1e-7 {
            end += 1;
        }
        let mut diff = DMatrix::<f64>::zeros(dim, dim);
        for s in start..end {
            let v = prop.vectors.column(s);
            diff += v * v.transpose();
            let u = modes.column(order[s]);
            diff -= u * u.transpose();
        }
        proj_dev = proj_dev.max(diff.amax());
        start = end;
    }
    Ok(SpectralReport {
        n,
        eigenvalue_deviation: eig_dev,
        projector_deviation: proj_dev,
        passed: eig_dev < 1e-9 && proj_dev < 1e-8,
    })
}

/// Walk exp(-it(α A_(1,0) + β A_(0,1))) on all 4^N words, from the zero word.
pub fn ordered_walk(n: usize, alpha: f64, beta: f64, t: f64) -> Result<Vec<C64>> {
    if n == 0 || n > FULL_SPACE_CAP {
        return Err(Error::CapExceeded { what: "ordered scheme size", value: n, cap: FULL_SPACE_CAP });
    }
    let mut terms = Vec::with_capacity(3 * n);
    for j in 0..n {
        terms.push((1usize << (2 * j), alpha));
        terms.push((2usize << (2 * j), beta));
        terms.push((3usize << (2 * j), beta));
    }
    let op = XorOperator { dim: 1 << (2 * n), terms };
    let mut psi = vec![C64::new(0.0, 0.0); op.dim];
    psi[0] = C64::new(1.0, 0.0);
    Ok(op.evolve(&psi, t))
}

/// Amplitudes on |col i,j> = k_{i,j}^{-1/2} Σ_{e(x)=(i,j)} |x> in triangle
/// order, and the norm of the part of `psi` orthogonal to the column space.
pub fn ordered_column_projection(n: usize, psi: &[C64]) -> Result<(Vec<C64>, f64)> {
    check_space(n, psi.len())?;
    let pts = triangle_points(n);
    let mut sums = vec![C64::new(0.0, 0.0); pts.len()];
    let column = |x: usize| {
        let s = shape_of(OrderedWord(x));
        triangle_index(n, s.e1, s.e2)
    };
    for (x, a) in psi.iter().enumerate() {
        sums[column(x)] += a;
    }
    let sizes: Vec<f64> = pts.iter().map(|&(i, j)| (multinomial(n as u64, i as u64, j as u64) << j) as f64).collect();
    let off: f64 = psi
        .iter()
        .enumerate()
        .map(|(x, a)| {
            let c = column(x);
            (a - sums[c] / sizes[c]).norm_sqr()
        })
        .sum();
    let cols = sums.iter().zip(&sizes).map(|(s, k)| s / k.sqrt()).collect();
    Ok((cols, off.sqrt()))
}

/// Full-space ordered walk versus the triangle Hamiltonian.
pub fn project_ordered_walk(n: usize, alpha: f64, beta: f64, t: f64) -> Result<ProjectionReport> {
    if n == 0 || n > WALK_CAP {
        return Err(Error::CapExceeded { what: "ordered walk projection", value: n, cap: WALK_CAP });
    }
    let psi = ordered_walk(n, alpha, beta, t)?;
    let (cols, off) = ordered_column_projection(n, &psi)?;
    let lattice = triangle_hamiltonian(n, alpha, beta)?.evolve_from_apex(t);
    let dev = cols.iter().zip(&lattice).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(ProjectionReport { n, time: t, max_deviation: dev, off_column_norm: off, passed: dev < 1e-8 && off < 1e-8 })
}

/// f_{(k,l)}(t) = e^{-iN(α+2β)t} √(2^l)/4^N √multinomial(N;k,l)
/// (1+2z₁+z₂)^{N-k-l} (1-2z₁+z₂)^k (1-z₂)^l, z₁ = e^{2i(α+β)t}, z₂ = e^{4iβt}.
pub fn closed_form_amplitude(n: usize, alpha: f64, beta: f64, t: f64, k: usize, l: usize) -> Result<C64> {
    if k + l > n {
        return Err(invalid("site", format!("({k}, {l}) lies outside the triangle of size {n}")));
    }
    let z1 = C64::from_polar(1.0, 2.0 * (alpha + beta) * t);
    let z2 = C64::from_polar(1.0, 4.0 * beta * t);
    let one = C64::new(1.0, 0.0);
    let phase = C64::from_polar(1.0, -(n as f64) * (alpha + 2.0 * beta) * t);
    let scale = 2f64.powi(l as i32).sqrt() / 4f64.powi(n as i32)
        * (multinomial(n as u64, k as u64, l as u64) as f64).sqrt();
    Ok(phase
        * scale
        * (one + z1 * 2.0 + z2).powu((n - k - l) as u32)
        * (one - z1 * 2.0 + z2).powu(k as u32)
        * (one - z2).powu(l as u32))
}

/// Amplitudes f_{(i,j)}(t) on a list of times, row-major (time, triangle index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeGrid {
    pub n: usize,
    pub times: Vec<f64>,
    pub values: Vec<C64>,
}

impl AmplitudeGrid {
    pub fn sites(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    /// Evolved under the triangle Hamiltonian from the apex.
    pub fn evolved(op: &TriangleOperator, times: &[f64]) -> Self {
        let prop = op.propagator();
        let values = times.par_iter().flat_map_iter(|&t| prop.amplitudes(t, 0)).collect();
        Self { n: op.n, times: times.to_vec(), values }
    }

    pub fn closed_form(n: usize, alpha: f64, beta: f64, times: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(times.len() * (n + 1) * (n + 2) / 2);
        for &t in times {
            for (k, l) in triangle_points(n) {
                values.push(closed_form_amplitude(n, alpha, beta, t, k, l)?);
            }
        }
        Ok(Self { n, times: times.to_vec(), values })
    }

    pub fn get(&self, time_index: usize, i: usize, j: usize) -> C64 {
        self.values[time_index * self.sites() + triangle_index(self.n, i, j)]
    }

    pub fn row(&self, time_index: usize) -> &[C64] {
        let s = self.sites();
        &self.values[time_index * s..(time_index + 1) * s]
    }

    /// |Σ|f|² - 1| for each time.
    pub fn norm_deviations(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|k| (self.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    /// all probability on one site other than the apex
    Pst,
    /// all probability back on the apex
    Revival,
    /// probability confined to the j = 0 edge, spread over several sites
    Fr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEvent {
    pub kind: EventKind,
    pub time: f64,
    /// the receiving site for PST and revival events
    pub site: Option<(usize, usize)>,
    /// probability outside the target site (PST, revival) or outside the j = 0 edge (FR)
    pub deficit: f64,
    /// |f|² per site in triangle order
    pub profile: Vec<f64>,
    /// max |f_evolved - f_closed_form| over sites
    pub closed_form_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transfer2dReport {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub t_max: f64,
    pub events: Vec<TransferEvent>,
}

impl Transfer2dReport {
    pub fn first(&self, kind: EventKind) -> Option<&TransferEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

/// Scans (0, t_max] on [`DETECT_GRID`] points, refines candidate peaks of the
/// single-site and j = 0 edge probabilities by bisection on their derivatives,
/// and keeps those within `tol` of 1. Events are sorted by time; each carries
/// its distance from the closed-form amplitudes.
pub fn detect_2d_transfer(n: usize, alpha: f64, beta: f64, t_max: f64, tol: f64) -> Result<Transfer2dReport> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", format!("must be positive, got {t_max}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", format!("must lie in (0, 1), got {tol}")));
    }
    let op = triangle_hamiltonian(n, alpha, beta)?;
    let prop = op.propagator();
    let pts = triangle_points(n);
    let edge: Vec<usize> = (0..=n).map(|i| triangle_index(n, i, 0)).collect();
    let step = t_max / DETECT_GRID as f64;
    let times: Vec<f64> = (1..=DETECT_GRID).map(|k| k as f64 * step).collect();

    let samples: Vec<(usize, f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let amps = prop.amplitudes(t, 0);
            let (best, p) = amps
                .iter()
                .map(|a| a.norm_sqr())
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty lattice");
            let on_edge = edge.iter().map(|&s| amps[s].norm_sqr()).sum();
            (best, p, on_edge)
        })
        .collect();

    let set_probability_derivative = |t: f64, set: &[usize]| -> f64 {
        let a = prop.amplitudes(t, 0);
        let da = prop.amplitude_derivatives(t, 0);
        set.iter().map(|&s| 2.0 * (a[s].conj() * da[s]).re).sum()
    };
    let refine = |signal: &[f64], set_at: &dyn Fn(usize) -> Vec<usize>| -> Vec<(f64, Vec<usize>)> {
        peak_brackets(signal)
            .into_iter()
            .filter(|&(k, _, _)| signal[k] > 0.5)
            .map(|(k, lo, hi)| {
                let set = set_at(k);
                let lo_t = if k == 0 { 0.0 } else { times[lo] };
                let t = bisect_maximum(|t| set_probability_derivative(t, &set), lo_t, times[hi], 1e-12);
                (t, set)
            })
            .collect()
    };

    let single: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let on_edge: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let mut candidates = refine(&single, &|k| vec![samples[k].0]);
    candidates.extend(refine(&on_edge, &|_| edge.clone()));

    let mut events: Vec<TransferEvent> = Vec::new();
    for (t, set) in candidates {
        if t < 0.5 * step {
            continue;
        }
        let amps = prop.amplitudes(t, 0);
        let profile: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        let captured: f64 = set.iter().map(|&s| profile[s]).sum();
        if 1.0 - captured > tol {
            continue;
        }
        let (kind, site) = if set.len() == 1 {
            let site = pts[set[0]];
            (if site == (0, 0) { EventKind::Revival } else { EventKind::Pst }, Some(site))
        } else {
            // an edge peak that is really a single-site event is reported by the single-site scan
            if profile.iter().any(|&p| p >= 1.0 - tol) {
                continue;
            }
            (EventKind::Fr, None)
        };
        if events.iter().any(|e| e.kind == kind && (e.time - t).abs() < 1e-6) {
            continue;
        }
        let mut dev = 0.0f64;
        for (s, &(k, l)) in pts.iter().enumerate() {
            dev = dev.max((amps[s] - closed_form_amplitude(n, alpha, beta, t, k, l)?).norm());
        }
        events.push(TransferEvent { kind, time: t, site, deficit: 1.0 - captured, profile, closed_form_deviation: dev });
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(Transfer2dReport { n, alpha, beta, t_max, events })
}
