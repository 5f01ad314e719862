//! Inverse spectral design: from a prescribed spectrum, build the
//! persymmetric Jacobi matrix whose chain realizes perfect state transfer,
//! and certify fractional revival at a given time.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::C64;
use crate::orthopoly::{RecurrenceCoefficients, MAX_DEGREE};

/// Tolerance on the unit circle for [`check_fr_condition`].
pub const FR_TOL: f64 = 1e-9;

/// Strictly increasing eigenvalues x_0 < ... < x_N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    points: Vec<f64>,
}

impl Spectrum {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("spectrum", "needs at least two points"));
        }
        if points.len() > MAX_DEGREE + 1 {
            return Err(Error::CapExceeded { what: "spectrum length", value: points.len(), cap: MAX_DEGREE + 1 });
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("spectrum", "non-finite point"));
        }
        if let Some(k) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing { index: k + 1 });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// N, so that the spectrum has N+1 points.
    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;
    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.points
    }
}

/// Revival data: exp(-iT x_s) = e^{iφ}(cos θ + i(-1)^{N+s} sin θ), so that
/// exp(-iTH)|e_0) = μ|e_0) + ν|e_N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrCertificate {
    pub time: f64,
    pub phi: f64,
    pub theta: f64,
    pub mu: C64,
    pub nu: C64,
}

impl FrCertificate {
    /// θ = ±π/2: the revival is a perfect transfer.
    pub fn is_pst(&self, tol: f64) -> bool {
        self.mu.norm() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FrCheck {
    Accepted(FrCertificate),
    Rejected { index: usize, deviation: f64 },
}

/// Monic orthogonal polynomials P_0..P_{N+1}, coefficients stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicFamily {
    pub polys: Vec<Vec<f64>>,
}

impl MonicFamily {
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        self.polys[n].iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// x_s = β(s + ½(δ-1)(1-(-1)^s) - ½(N-1+δ)): two interleaved lattices.
pub fn bilattice_spectrum(n: usize, beta: f64, delta: f64) -> Result<Spectrum> {
    if n == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    if !(delta > 0.0 && delta < 2.0) {
        return Err(invalid("delta", format!("must lie in (0,2), got {delta}")));
    }
    let points = (0..=n)
        .map(|s| {
            let odd = if s % 2 == 1 { 2.0 } else { 0.0 };
            beta * (s as f64 + 0.5 * (delta - 1.0) * odd - 0.5 * (n as f64 - 1.0 + delta))
        })
        .collect();
    Spectrum::new(points)
}

/// σ_s = (-1)^{N+s}, the values χ_N(x_s) must take for transfer.
pub fn pst_signs(n: usize) -> Vec<i8> {
    (0..=n).map(|s| if (n + s) % 2 == 0 { 1 } else { -1 }).collect()
}

/// Read off φ and θ from the first two points and test every other point.
pub fn check_fr_condition(spec: &Spectrum, t: f64) -> Result<FrCheck> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("T", format!("must be positive, got {t}")));
    }
    let x = spec.points();
    let n = spec.degree();
    let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
    let phi = wrap_angle(-t * (x[0] + x[1]) / 2.0);
    let theta = wrap_angle(parity * t * (x[1] - x[0]) / 2.0);
    let rotor = C64::from_polar(1.0, phi);
    for (s, (&xs, sign)) in x.iter().zip(pst_signs(n)).enumerate() {
        let expected = rotor * C64::new(theta.cos(), f64::from(sign) * theta.sin());
        let deviation = (C64::from_polar(1.0, -t * xs) - expected).norm();
        if deviation > FR_TOL {
            return Ok(FrCheck::Rejected { index: s, deviation });
        }
    }
    Ok(FrCheck::Accepted(FrCertificate {
        time: t,
        phi,
        theta,
        mu: rotor * theta.cos(),
        nu: rotor * C64::new(0.0, theta.sin()),
    }))
}

fn wrap_angle(a: f64) -> f64 {
    a.sin().atan2(a.cos())
}

/// Spectral weights of the persymmetric chain with this spectrum,
/// w_s ∝ 1/|Π_{r≠s}(x_s - x_r)|, normalized to sum 1.
pub fn persymmetric_weights(spec: &Spectrum) -> Vec<f64> {
    let x = spec.points();
    let logs: Vec<f64> = (0..x.len())
        .map(|s| {
            -x.iter()
                .enumerate()
                .filter(|&(r, _)| r != s)
                .map(|(_, xr)| (x[s] - xr).abs().ln())
                .sum::<f64>()
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Persymmetric Jacobi matrix with the given spectrum, by Lanczos on
/// diag(x) started from √w with full reorthogonalization.
pub fn reconstruct_jacobi(spec: &Spectrum) -> Result<RecurrenceCoefficients> {
    let x = DVector::from_column_slice(spec.points());
    let m = x.len();
    let weights = persymmetric_weights(spec);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
    basis.push(DVector::from_iterator(m, weights.iter().map(|w| w.sqrt())));
    let mut fields = Vec::with_capacity(m);
    let mut couplings = Vec::with_capacity(m - 1);
    for n in 0..m {
        let q = &basis[n];
        let mut v = x.component_mul(q);
        let alpha = q.dot(&v);
        fields.push(alpha);
        if n + 1 == m {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let beta = v.norm();
        let scale = x.amax().max(1.0);
        if !(beta > 1e-12 * scale) {
            return Err(Error::Infeasible { index: n + 1, value: beta * beta });
        }
        couplings.push(beta);
        basis.push(v / beta);
    }
    RecurrenceCoefficients::new(couplings, fields)
}

/// Monic polynomials from the spectrum by interpolation and downward
/// Euclidean division: P_{N+1} = Π(x - x_s), P_N interpolates κ(-1)^{N+s}
/// with κ fixed by monicity, then P_{n+1} = (x - B_n) P_n - J_n² P_{n-1}.
/// Works in the raw monomial basis, so it is only well conditioned for
/// short chains; [`reconstruct_jacobi`] is the general-purpose route.
pub fn monic_family(spec: &Spectrum) -> Result<MonicFamily> {
    Ok(euclidean(spec)?.0)
}

/// Same coefficients as [`reconstruct_jacobi`], read off the Euclidean steps
/// of [`monic_family`] after an affine map of the spectrum onto [-1, 1].
pub fn reconstruct_jacobi_euclidean(spec: &Spectrum) -> Result<RecurrenceCoefficients> {
    let x = spec.points();
    let centre = 0.5 * (x[0] + x[x.len() - 1]);
    let half = 0.5 * (x[x.len() - 1] - x[0]);
    let scaled = Spectrum::new(x.iter().map(|v| (v - centre) / half).collect())?;
    let (_, b, j2) = euclidean(&scaled)?;
    let couplings = j2.iter().map(|c| half * c.sqrt()).collect();
    let fields = b.iter().map(|v| centre + half * v).collect();
    RecurrenceCoefficients::new(couplings, fields)
}

type EuclideanSteps = (MonicFamily, Vec<f64>, Vec<f64>);

fn euclidean(spec: &Spectrum) -> Result<EuclideanSteps> {
    let x = spec.points();
    let n = spec.degree();
    let mut top = vec![1.0];
    for &xs in x {
        top = mul_linear(&top, xs);
    }
    // P_N by Lagrange interpolation of the PST signs
    let mut below = vec![0.0; n + 1];
    for (s, sign) in pst_signs(n).into_iter().enumerate() {
        let basis = div_linear(&top, x[s]);
        let denom: f64 = x.iter().enumerate().filter(|&(r, _)| r != s).map(|(_, xr)| x[s] - xr).product();
        for (acc, c) in below.iter_mut().zip(&basis) {
            *acc += f64::from(sign) * c / denom;
        }
    }
    let kappa = below[n];
    if !(kappa > 0.0) {
        return Err(Error::Singular("interpolated P_N has non-positive leading coefficient".into()));
    }
    below.iter_mut().for_each(|c| *c /= kappa);

    let mut polys = vec![Vec::new(); n + 2];
    let mut fields = vec![0.0; n + 1];
    let mut squares = vec![0.0; n];
    polys[n + 1] = top;
    polys[n] = below;
    for k in (1..=n).rev() {
        // P_{k+1} = (x - B_k) P_k + r, r = -J_k^2 P_{k-1}
        let upper = &polys[k + 1];
        let lower = &polys[k];
        let shift = upper[k] - lower[k - 1];
        fields[k] = -shift;
        let mut rem = upper.clone();
        for (i, c) in lower.iter().enumerate() {
            rem[i + 1] -= c;
            rem[i] -= shift * c;
        }
        let c2 = -rem[k - 1];
        if !(c2 > 0.0) {
            return Err(Error::Infeasible { index: k, value: c2 });
        }
        squares[k - 1] = c2;
        polys[k - 1] = rem[..k].iter().map(|c| -c / c2).collect();
    }
    fields[0] = -polys[1][0];
    Ok((MonicFamily { polys }, fields, squares))
}

fn mul_linear(p: &[f64], root: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= root * c;
    }
    out
}

/// Quotient of p by (x - root), discarding the remainder.
fn div_linear(p: &[f64], root: f64) -> Vec<f64> {
    let deg = p.len() - 1;
    let mut q = vec![0.0; deg];
    let mut carry = 0.0;
    for i in (0..deg).rev() {
        carry = p[i + 1] + root * carry;
        q[i] = carry;
    }
    q
}

/// J_{N-n+1} = J_n and B_{N-n} = B_n within `tol`.
pub fn mirror_symmetric(coeffs: &RecurrenceCoefficients, tol: f64) -> bool {
    let j = coeffs.couplings();
    let b = coeffs.fields();
    let jn = j.len();
    let bn = b.len();
    (0..jn).all(|k| (j[k] - j[jn - 1 - k]).abs() <= tol) && (0..bn).all(|k| (b[k] - b[bn - 1 - k]).abs() <= tol)
}
