//! Bivariate Krawtchouk polynomials on the triangle {(x, y): x + y ≤ N}:
//! the Tratnik product form, the Griffiths quadruple series, the SO(3)
//! construction with its two 7-term recurrences, and the orthonormal
//! ("Hermitian") Tratnik polynomials that diagonalize the triangular lattice.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{factorial, multinomial, pochhammer, triangle_index, triangle_points};
use crate::error::{invalid, Error, Result};
use crate::orthopoly::krawtchouk_sum;

/// Parameters (p, q) of the trinomial distribution on the triangle of size N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TratnikParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

impl TratnikParams {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        if !(p > 0.0 && q > 0.0 && p + q < 1.0) {
            return Err(invalid("p, q", format!("need p, q > 0 and p + q < 1, got p={p}, q={q}")));
        }
        Ok(Self { n, p, q })
    }

    /// The p = ½, q = ¼ family attached to the ordered 2-Hamming scheme.
    pub fn scheme(n: usize) -> Result<Self> {
        Self::new(n, 0.5, 0.25)
    }
}

/// Griffiths parameters; must satisfy p u_i + q v_i = 1 and p u_1 u_2 + q v_1 v_2 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GriffithsParams {
    pub u1: f64,
    pub v1: f64,
    pub u2: f64,
    pub v2: f64,
    pub p: f64,
    pub q: f64,
}

impl GriffithsParams {
    pub fn new(u1: f64, v1: f64, u2: f64, v2: f64, p: f64, q: f64) -> Result<Self> {
        let g = Self { u1, v1, u2, v2, p, q };
        let scale = 1.0 + [u1, v1, u2, v2].iter().map(|v| v.abs()).fold(0.0, f64::max).powi(2);
        let gaps = [p * u1 + q * v1 - 1.0, p * u2 + q * v2 - 1.0, p * u1 * u2 + q * v1 * v2 - 1.0];
        if gaps.iter().any(|g| !(g.abs() <= 1e-12 * scale)) {
            return Err(invalid("griffiths", format!("constraint residuals {gaps:?}")));
        }
        Ok(g)
    }

    /// u_1 = 1/p, v_1 = 0, u_2 = 1, v_2 = (1-p)/q, which turns the series into Tratnik's.
    pub fn tratnik(p: f64, q: f64) -> Result<Self> {
        Self::new(1.0 / p, 0.0, 1.0, (1.0 - p) / q, p, q)
    }

    /// p = R_13², q = R_23² and u, v from the rotation entries.
    pub fn from_rotation(r: &Rotation3) -> Result<Self> {
        let m = &r.m;
        let (r13, r23, r31, r32, r33) = (m[0][2], m[1][2], m[2][0], m[2][1], m[2][2]);
        for (v, name) in [(r13, "R13"), (r23, "R23"), (r31, "R31"), (r32, "R32"), (r33, "R33")] {
            if v == 0.0 {
                return Err(Error::Singular(format!("{name} vanishes")));
            }
        }
        Self::new(
            1.0 - m[0][0] * r33 / (r13 * r31),
            1.0 - m[1][0] * r33 / (r23 * r31),
            1.0 - m[0][1] * r33 / (r13 * r32),
            1.0 - m[1][1] * r33 / (r23 * r32),
            r13 * r13,
            r23 * r23,
        )
    }
}

/// A proper rotation of R^3, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation3 {
    pub m: [[f64; 3]; 3],
}

impl Rotation3 {
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][a] * m[k][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                if !((dot - want).abs() <= 1e-12) {
                    return Err(invalid("rotation", "not orthogonal"));
                }
            }
        }
        let r = Self { m };
        if !((r.det() - 1.0).abs() <= 1e-12) {
            return Err(invalid("rotation", "determinant is not +1"));
        }
        Ok(r)
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// R_yz(θ) R_xz(φ), the family for which the Griffiths series reduces to Tratnik's.
    pub fn yz_xz(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self { m: [[cp, 0.0, -sp], [st * sp, ct, st * cp], [ct * sp, -st, ct * cp]] }
    }

    /// Gram–Schmidt of a random Gaussian-free uniform 3×3 matrix, det forced to +1.
    /// Draws again while any of R_13, R_23, R_31, R_32, R_33 is below 1e-3 in size.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut cols = [[0.0f64; 3]; 3];
            for col in cols.iter_mut() {
                for v in col.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
            for a in 0..3 {
                for b in 0..a {
                    let d: f64 = (0..3).map(|k| cols[a][k] * cols[b][k]).sum();
                    for k in 0..3 {
                        cols[a][k] -= d * cols[b][k];
                    }
                }
                let norm = cols[a].iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 1e-6 {
                    continue;
                }
                cols[a].iter_mut().for_each(|v| *v /= norm);
            }
            let mut m = [[0.0; 3]; 3];
            for (c, col) in cols.iter().enumerate() {
                for r in 0..3 {
                    m[r][c] = col[r];
                }
            }
            let mut rot = Self { m };
            if rot.det() < 0.0 {
                for row in rot.m.iter_mut() {
                    row[2] = -row[2];
                }
            }
            let m = &rot.m;
            if [m[0][2], m[1][2], m[2][0], m[2][1], m[2][2]].iter().all(|v| v.abs() >= 1e-3)
                && Rotation3::new(rot.m).is_ok()
            {
                return rot;
            }
        }
    }
}

fn check_point(n: usize, (x, y): (usize, usize), what: &'static str) -> Result<()> {
    if x + y > n {
        return Err(invalid(what, format!("({x}, {y}) lies outside the triangle of size {n}")));
    }
    Ok(())
}

/// multinomial(N; x, y) p^x q^y (1-p-q)^{N-x-y}.
pub fn trinomial_weight(params: &TratnikParams, x: usize, y: usize) -> Result<f64> {
    check_point(params.n, (x, y), "point")?;
    let r = 1.0 - params.p - params.q;
    Ok(multinomial(params.n as u64, x as u64, y as u64) as f64
        * params.p.powi(x as i32)
        * params.q.powi(y as i32)
        * r.powi((params.n - x - y) as i32))
}

/// Tratnik polynomial T^N_{m,n}(x, y)
/// = (n-N)_m (x-N)_n / (-N)_{m+n} · K_m^{N-n}(x; p) · K_n^{N-x}(y; q/(1-p)).
/// The factor (x-N)_n is folded into the second sum so x close to N stays finite.
pub fn tratnik_eval(params: &TratnikParams, (m, n): (usize, usize), (x, y): (f64, f64)) -> Result<f64> {
    let cap = params.n;
    check_point(cap, (m, n), "index")?;
    let nf = cap as f64;
    let prefactor = pochhammer(n as f64 - nf, m) / pochhammer(-nf, m + n);
    let first = krawtchouk_sum(m, x, (cap - n) as f64, params.p);
    let ratio = (1.0 - params.p) / params.q;
    let mut second = 0.0;
    for k in 0..=n {
        let term = pochhammer(-(n as f64), k) * pochhammer(-y, k) / factorial(k)
            * pochhammer(x - nf + k as f64, n - k)
            * ratio.powi(k as i32);
        second += term;
    }
    Ok(prefactor * first * second)
}

/// Griffiths polynomial as the terminating quadruple series over
/// i + j + k + l ≤ N.
pub fn griffiths_eval(g: &GriffithsParams, cap: usize, (m, n): (usize, usize), (x, y): (f64, f64)) -> Result<f64> {
    check_point(cap, (m, n), "index")?;
    let nf = cap as f64;
    let mut sum = 0.0;
    for i in 0..=m {
        for j in 0..=(m - i) {
            let a = pochhammer(-(m as f64), i + j);
            for k in 0..=n {
                for l in 0..=(n - k) {
                    let total = i + j + k + l;
                    if total > cap {
                        continue;
                    }
                    let num = a * pochhammer(-(n as f64), k + l) * pochhammer(-x, i + k) * pochhammer(-y, j + l);
                    if num == 0.0 {
                        continue;
                    }
                    let den = factorial(i) * factorial(j) * factorial(k) * factorial(l) * pochhammer(-nf, total);
                    sum += num / den
                        * g.u1.powi(i as i32)
                        * g.v1.powi(j as i32)
                        * g.u2.powi(k as i32)
                        * g.v2.powi(l as i32);
                }
            }
        }
    }
    Ok(sum)
}

/// w_{i,k;N} = R_13^i R_23^k R_33^{N-i-k} √multinomial(N; i, k).
pub fn so3_weight(r: &Rotation3, n: usize, (i, k): (usize, usize)) -> Result<f64> {
    check_point(n, (i, k), "point")?;
    let m = &r.m;
    if m[2][2] == 0.0 {
        return Err(Error::Singular("R33 vanishes".into()));
    }
    Ok(m[0][2].powi(i as i32)
        * m[1][2].powi(k as i32)
        * m[2][2].powi((n - i - k) as i32)
        * (multinomial(n as u64, i as u64, k as u64) as f64).sqrt())
}

/// Orthonormal Tratnik polynomial
/// P_{i,j} = √(multinomial(N;i,j) p̃^i q̃^j (1-p-q)^{-i-j}) T_{i,j},
/// p̃ = p(1-p-q)/(1-p), q̃ = q/(1-p).
pub fn hermitian_tratnik(params: &TratnikParams, (i, j): (usize, usize), (x, y): (f64, f64)) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    let r = 1.0 - p - q;
    let pt = p * r / (1.0 - p);
    let qt = q / (1.0 - p);
    let norm = multinomial(params.n as u64, i as u64, j as u64) as f64 * pt.powi(i as i32) * qt.powi(j as i32)
        / r.powi((i + j) as i32);
    Ok(norm.sqrt() * tratnik_eval(params, (i, j), (x, y))?)
}

/// [`hermitian_tratnik`] at p = ½, q = ¼.
pub fn orthonormal_eval(n: usize, idx: (usize, usize), point: (f64, f64)) -> Result<f64> {
    hermitian_tratnik(&TratnikParams::scheme(n)?, idx, point)
}

/// Orthonormal polynomial P^N_{m,n}(i,k) attached to a rotation:
/// √multinomial(N;m,n) (R_31/R_33)^m (R_32/R_33)^n G^N_{m,n}(i,k).
pub fn rotation_polynomial(
    r: &Rotation3,
    g: &GriffithsParams,
    n_cap: usize,
    (m, n): (usize, usize),
    point: (usize, usize),
) -> Result<f64> {
    let mm = &r.m;
    let pre = (multinomial(n_cap as u64, m as u64, n as u64) as f64).sqrt()
        * (mm[2][0] / mm[2][2]).powi(m as i32)
        * (mm[2][1] / mm[2][2]).powi(n as i32);
    Ok(pre * griffiths_eval(g, n_cap, (m, n), (point.0 as f64, point.1 as f64))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub n: usize,
    pub checks: usize,
    pub max_residual: f64,
    pub passed: bool,
}

/// Values table[point][index] over the triangle, indices and points both in
/// `triangle_points` order.
fn table<F>(n: usize, mut f: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut((usize, usize), (usize, usize)) -> Result<f64>,
{
    let pts = triangle_points(n);
    pts.iter().map(|&pt| pts.iter().map(|&idx| f(idx, pt)).collect()).collect()
}

/// Lookup with out-of-triangle indices read as zero.
fn at(row: &[f64], n: usize, i: isize, j: isize) -> f64 {
    if i < 0 || j < 0 || (i + j) as usize > n {
        return 0.0;
    }
    row[triangle_index(n, i as usize, j as usize)]
}

pub const SEVEN_TERM_CAP: usize = 12;

/// Matrix elements <i,k|U(R)|m,n> on the energy-N oscillator states, rows
/// (i,k) and columns (m,n) in triangle order. Built by expanding
/// Π_c (R_1c X + R_2c Y + R_3c Z)^{n_c}, so every step adds bounded terms.
/// Column (0,0) is w_{i,k;N}, and each entry equals w_{i,k;N} P_{m,n}(i,k).
pub fn so3_matrix_elements(r: &Rotation3, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || n > SEVEN_TERM_CAP {
        return Err(Error::CapExceeded { what: "SO(3) representation", value: n, cap: SEVEN_TERM_CAP });
    }
    let pts = triangle_points(n);
    let dim = pts.len();
    let m = &r.m;
    let mut out = DMatrix::zeros(dim, dim);
    for (col, &(a, b)) in pts.iter().enumerate() {
        // coefficients of X^i Y^k Z^{deg-i-k}, indexed by triangle_index(deg, i, k)
        let mut poly = vec![1.0];
        let mut deg = 0;
        for (c, power) in [(0usize, a), (1, b), (2, n - a - b)] {
            for _ in 0..power {
                let mut next = vec![0.0; (deg + 2) * (deg + 3) / 2];
                for (i, k) in triangle_points(deg) {
                    let v = poly[triangle_index(deg, i, k)];
                    next[triangle_index(deg + 1, i + 1, k)] += m[0][c] * v;
                    next[triangle_index(deg + 1, i, k + 1)] += m[1][c] * v;
                    next[triangle_index(deg + 1, i, k)] += m[2][c] * v;
                }
                poly = next;
                deg += 1;
            }
        }
        let norm_in = factorial(a) * factorial(b) * factorial(n - a - b);
        for (row, &(i, k)) in pts.iter().enumerate() {
            let norm_out = factorial(i) * factorial(k) * factorial(n - i - k);
            out[(row, col)] = poly[triangle_index(n, i, k)] * (norm_out / norm_in).sqrt();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SevenTermReport {
    pub n: usize,
    pub checks: usize,
    /// max |lhs - rhs| of both recurrences multiplied through by w_{i,k;N}
    pub max_residual: f64,
    /// max |w_{i,k;N} P_griffiths - <i,k|U|m,n>|; large when R_33 is small,
    /// where the Griffiths series cancels badly
    pub griffiths_deviation: f64,
    pub passed: bool,
}

/// Both 7-term recurrences at every triangle point and index. They are
/// evaluated on w_{i,k;N} P_{m,n}(i,k) = <i,k|U(R)|m,n>, which is bounded by 1
/// and computed without the cancellation of the Griffiths series; the series
/// itself is compared against the same values. Rotations for which the
/// parametrization is singular are reported as errors.
pub fn verify_seven_term(r: &Rotation3, n: usize) -> Result<SevenTermReport> {
    let g = GriffithsParams::from_rotation(r)?;
    let u = so3_matrix_elements(r, n)?;
    let m = &r.m;
    let pts = triangle_points(n);
    let mut worst = 0.0f64;
    let mut series = 0.0f64;
    let mut checks = 0;
    for (row_idx, &pt) in pts.iter().enumerate() {
        let row: Vec<f64> = u.row(row_idx).iter().copied().collect();
        let w = row[0];
        for (col, &idx) in pts.iter().enumerate() {
            let gp = w * rotation_polynomial(r, &g, n, idx, pt)?;
            series = series.max((gp - row[col]).abs());
        }
        for &(a, b) in &pts {
            let (ai, bi) = (a as isize, b as isize);
            let rest = (n - a - b) as f64;
            let (af, bf) = (a as f64, b as f64);
            let p = |i: isize, j: isize| at(&row, n, i, j);
            for (axis, lhs_var) in [(0usize, pt.0), (1, pt.1)] {
                let (c1, c2, c3) = (m[axis][0], m[axis][1], m[axis][2]);
                let rhs = (c1 * c1 * af + c2 * c2 * bf + c3 * c3 * rest) * p(ai, bi)
                    + c1 * c2 * ((af * (bf + 1.0)).sqrt() * p(ai - 1, bi + 1) + (bf * (af + 1.0)).sqrt() * p(ai + 1, bi - 1))
                    + c1 * c3 * ((af * (rest + 1.0)).sqrt() * p(ai - 1, bi) + ((af + 1.0) * rest).sqrt() * p(ai + 1, bi))
                    + c2 * c3 * ((bf * (rest + 1.0)).sqrt() * p(ai, bi - 1) + ((bf + 1.0) * rest).sqrt() * p(ai, bi + 1));
                worst = worst.max((lhs_var as f64 * p(ai, bi) - rhs).abs());
                checks += 1;
            }
        }
    }
    Ok(SevenTermReport { n, checks, max_residual: worst, griffiths_deviation: series, passed: worst < 1e-8 })
}

/// The two Tratnik recurrences in x and y at every triangle point. The y
/// relation includes the -(1-p-q) j [T_{i,j-1} - T_{i,j}] term.
pub fn tratnik_recurrence_residual(params: &TratnikParams) -> Result<ResidualReport> {
    let n = params.n;
    let vals = table(n, |idx, pt| tratnik_eval(params, idx, (pt.0 as f64, pt.1 as f64)))?;
    let (p, q) = (params.p, params.q);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for (pt, row) in triangle_points(n).into_iter().zip(&vals) {
        let (x, y) = (pt.0 as f64, pt.1 as f64);
        let scale = row.iter().map(|v| v.abs()).fold(1.0, f64::max) * (n as f64 + 1.0);
        for (i, j) in triangle_points(n) {
            let (ii, jj) = (i as isize, j as isize);
            let t = |a: isize, b: isize| at(row, n, a, b);
            let here = t(ii, jj);
            let rest = (n - i - j) as f64;
            let (fi, fj) = (i as f64, j as f64);
            let rx = -p * rest * (t(ii + 1, jj) - here) - (1.0 - p) * fi * (t(ii - 1, jj) - here);
            let ry = p * q / (1.0 - p) * rest * (t(ii + 1, jj) - here) - q / (1.0 - p) * rest * (t(ii, jj + 1) - here)
                + q * fi * (t(ii - 1, jj) - here)
                - p * (1.0 - p - q) / (1.0 - p) * fj * (t(ii + 1, jj - 1) - here)
                - q / (1.0 - p) * fi * (t(ii - 1, jj + 1) - here)
                - (1.0 - p - q) * fj * (t(ii, jj - 1) - here);
            worst = worst.max((x * here - rx).abs() / scale).max((y * here - ry).abs() / scale);
            checks += 2;
        }
    }
    Ok(ResidualReport { n, checks, max_residual: worst, passed: worst < 1e-9 })
}

/// The three-direction relation of the orthonormal polynomials at p = ½,
/// q = ¼: [α(N-2x) + β(2N-2x-4y)] P_{i,j}(x,y) equals the seven-term
/// combination of neighbouring P's with the triangular-lattice couplings.
pub fn hermitian_relation_residual(n: usize, alpha: f64, beta: f64) -> Result<ResidualReport> {
    let vals = table(n, |idx, pt| orthonormal_eval(n, idx, (pt.0 as f64, pt.1 as f64)))?;
    let mut worst = 0.0f64;
    let mut checks = 0;
    for (pt, row) in triangle_points(n).into_iter().zip(&vals) {
        let lambda = alpha * (n as f64 - 2.0 * pt.0 as f64) + beta * (2.0 * n as f64 - 2.0 * pt.0 as f64 - 4.0 * pt.1 as f64);
        let scale = row.iter().map(|v| v.abs()).fold(1.0, f64::max) * (1.0 + lambda.abs());
        for (i, j) in triangle_points(n) {
            let (ii, jj) = (i as isize, j as isize);
            let pv = |a: isize, b: isize| at(row, n, a, b);
            let rhs: f64 = crate::ordered::triangle_neighbours(n, alpha, beta, i, j)
                .into_iter()
                .map(|((a, b), c)| c * pv(a as isize, b as isize))
                .sum();
            worst = worst.max((lambda * pv(ii, jj) - rhs).abs() / scale);
            checks += 1;
        }
    }
    Ok(ResidualReport { n, checks, max_residual: worst, passed: worst < 1e-10 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_residual: f64,
    pub passed: bool,
}

/// Σ multinomial(N;x,y) T_{i,j}(x,y) s^x t^y against
/// (1+s+t)^{N-i-j} (1 + (p-1)s/p + t)^i (1 + (p+q-1)t/q)^j.
pub fn generating_function_check(params: &TratnikParams, (i, j): (usize, usize), s: f64, t: f64) -> Result<GeneratingReport> {
    let n = params.n;
    check_point(n, (i, j), "index")?;
    let (p, q) = (params.p, params.q);
    let mut lhs = 0.0;
    for (x, y) in triangle_points(n) {
        lhs += multinomial(n as u64, x as u64, y as u64) as f64
            * tratnik_eval(params, (i, j), (x as f64, y as f64))?
            * s.powi(x as i32)
            * t.powi(y as i32);
    }
    let rhs = (1.0 + s + t).powi((n - i - j) as i32)
        * (1.0 + (p - 1.0) / p * s + t).powi(i as i32)
        * (1.0 + (p + q - 1.0) / q * t).powi(j as i32);
    let rel = (lhs - rhs).abs() / rhs.abs().max(1.0);
    Ok(GeneratingReport { lhs, rhs, relative_residual: rel, passed: rel < 1e-9 })
}
