//! Dense and matrix-free numerical kernels: symmetric eigendecomposition,
//! spectral propagation, Taylor-series exponentials and a bracketed
//! maximizer used by the transfer detectors.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use twofloat::TwoFloat;

pub type C64 = Complex64;

/// Eigenpairs of a real symmetric matrix, ascending, with each eigenvector's
/// sign fixed so that its largest-magnitude leading component is positive.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub values: Vec<f64>,
    /// column s is the eigenvector of `values[s]`
    pub vectors: DMatrix<f64>,
}

impl Propagator {
    pub fn from_symmetric(matrix: DMatrix<f64>) -> Self {
        let n = matrix.nrows();
        let eig = SymmetricEigen::new(matrix);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            // first entry that is clearly nonzero decides the sign
            let pivot = v.iter().copied().find(|x| x.abs() > 1e-8).unwrap_or(1.0);
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for row in 0..n {
                vectors[(row, col)] = sign * v[row];
            }
        }
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Column `source` of exp(-itH).
    pub fn amplitudes(&self, t: f64, source: usize) -> Vec<C64> {
        let phases = self.weighted_phases(t, source, false);
        self.combine(&phases)
    }

    /// Time derivative of [`Self::amplitudes`].
    pub fn amplitude_derivatives(&self, t: f64, source: usize) -> Vec<C64> {
        let phases = self.weighted_phases(t, source, true);
        self.combine(&phases)
    }

    /// Single entry <target| exp(-itH) |source>, together with its time derivative.
    pub fn amplitude_with_derivative(&self, t: f64, target: usize, source: usize) -> (C64, C64) {
        let mut amp = C64::new(0.0, 0.0);
        let mut der = C64::new(0.0, 0.0);
        for (s, &x) in self.values.iter().enumerate() {
            let c = self.vectors[(target, s)] * self.vectors[(source, s)];
            let ph = C64::from_polar(1.0, -t * x);
            amp += ph * c;
            der += ph * C64::new(0.0, -x) * c;
        }
        (amp, der)
    }

    fn weighted_phases(&self, t: f64, source: usize, derivative: bool) -> Vec<C64> {
        self.values
            .iter()
            .enumerate()
            .map(|(s, &x)| {
                let ph = C64::from_polar(self.vectors[(source, s)], -t * x);
                if derivative {
                    ph * C64::new(0.0, -x)
                } else {
                    ph
                }
            })
            .collect()
    }

    fn combine(&self, coeffs: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|row| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(s, c)| c * self.vectors[(row, s)])
                    .sum()
            })
            .collect()
    }
}

/// exp(A) by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / C64::from(2f64.powi(squarings));
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..60 {
        term = &term * &scaled / C64::from(k as f64);
        result += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// exp(-itH) psi for a Hermitian H known only through its action, using
/// Taylor steps of norm at most `STEP_NORM`. `norm_bound` must bound ||H||.
pub fn taylor_evolve<F>(apply: F, norm_bound: f64, psi: &[C64], t: f64, tol: f64) -> Vec<C64>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    const STEP_NORM: f64 = 2.0;
    let steps = ((norm_bound * t.abs()) / STEP_NORM).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let factor = C64::new(0.0, -dt);
    let mut state = psi.to_vec();
    for _ in 0..steps {
        let mut term = state.clone();
        let mut acc = state.clone();
        for k in 1..100 {
            let applied = apply(&term);
            let scale = factor / k as f64;
            let mut size = 0.0f64;
            for (tk, a) in term.iter_mut().zip(applied) {
                *tk = a * scale;
                size = size.max(tk.norm());
            }
            for (acc_k, tk) in acc.iter_mut().zip(&term) {
                *acc_k += tk;
            }
            if size < tol * 1e-4 {
                break;
            }
        }
        state = acc;
    }
    state
}

/// Weighted sum of XOR translations: (Hv)_x = Σ_k w_k v_{x ^ m_k}.
/// Both the hypercube and the ordered-scheme walks have this form.
#[derive(Debug, Clone)]
pub struct XorOperator {
    pub dim: usize,
    pub terms: Vec<(usize, f64)>,
}

impl XorOperator {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        out.par_iter_mut().enumerate().for_each(|(x, o)| {
            let mut acc = C64::new(0.0, 0.0);
            for &(m, w) in &self.terms {
                acc += v[x ^ m] * w;
            }
            *o = acc;
        });
        out
    }

    /// Row-sum bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w.abs()).sum()
    }

    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        taylor_evolve(|v| self.apply(v), self.norm_bound(), psi, t, 1e-12)
    }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `off`, from the signs of the LDLᵀ pivots
/// of T - x. Pivots are carried in double-double so the count is exact for
/// the stored f64 entries except in pathological cancellations.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = TwoFloat::new_sub(diag[0], x);
    for k in 0..diag.len() {
        if k > 0 {
            let j2 = TwoFloat::new_mul(off[k - 1], off[k - 1]);
            let prev = if d == 0.0 { TwoFloat::from(f64::MIN_POSITIVE) } else { d };
            d = TwoFloat::new_sub(diag[k], x) - j2 / prev;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Tighten an approximate eigenvalue (the `index`-th smallest) of a symmetric
/// tridiagonal matrix by bisection on [`sturm_count`] until the bracket is
/// two adjacent floats.
pub fn refine_tridiagonal_eigenvalue(diag: &[f64], off: &[f64], approx: f64, index: usize) -> f64 {
    let scale = diag.iter().chain(off).fold(approx.abs(), |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut delta = 64.0 * f64::EPSILON * scale;
    let (mut lo, mut hi);
    loop {
        lo = approx - delta;
        hi = approx + delta;
        if sturm_count(diag, off, lo) <= index && sturm_count(diag, off, hi) > index {
            break;
        }
        delta *= 4.0;
        if !delta.is_finite() {
            return approx;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // λ lies in [lo, hi); either end is within one ulp
    lo
}

/// Locate a local maximum of a smooth function from its derivative, given a
/// bracket where the derivative goes from non-negative to non-positive.
/// Bisects until the bracket is narrower than `width`.
pub fn bisect_maximum<F>(derivative: F, mut lo: f64, mut hi: f64, width: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..200 {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let d_mid = derivative(mid);
        if d_mid == 0.0 {
            return mid;
        }
        if d_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Local maxima of a sampled sequence as `(peak, lo, hi)` index triples with
/// `lo..=hi` bracketing the peak. Ends count when the sequence rises into them.
pub fn peak_brackets(values: &[f64]) -> Vec<(usize, usize, usize)> {
    let n = values.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
        let right = if i + 1 == n { f64::NEG_INFINITY } else { values[i + 1] };
        if values[i] >= left && values[i] > right {
            out.push((i, i.saturating_sub(1), (i + 1).min(n - 1)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expm_of_pauli_x() {
        // exp(-i t X) = cos t I - i sin t X
        let t = 0.7;
        let mut a = DMatrix::<C64>::zeros(2, 2);
        a[(0, 1)] = C64::new(0.0, -t);
        a[(1, 0)] = C64::new(0.0, -t);
        let e = expm(&a);
        assert_abs_diff_eq!(e[(0, 0)].re, t.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 0)].im, -t.sin(), epsilon = 1e-14);
    }

    #[test]
    fn taylor_matches_expm_on_small_matrix() {
        let h = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.5, 2.0, 0.0, 2.0, -1.0]);
        let psi = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let t = 3.3;
        let apply = |v: &[C64]| -> Vec<C64> {
            (0..3).map(|i| (0..3).map(|j| v[j] * h[(i, j)]).sum()).collect()
        };
        let got = taylor_evolve(apply, 3.5, &psi, t, 1e-12);
        let hc = h.map(|x| C64::new(0.0, -t * x));
        let e = expm(&hc);
        for i in 0..3 {
            assert!((got[i] - e[(i, 0)]).norm() < 1e-12);
        }
    }

    #[test]
    fn propagator_sign_convention_and_unitarity() {
        let h = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let p = Propagator::from_symmetric(h);
        assert!(p.values.windows(2).all(|w| w[0] < w[1]));
        assert!((0..3).all(|s| p.vectors[(0, s)] > 0.0));
        let amps = p.amplitudes(1.234, 1);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn sturm_refinement_on_path_graph() {
        // eigenvalues of the path P_n: 2 cos(kπ/(n+1))
        let n = 9;
        let diag = vec![0.0; n];
        let off = vec![1.0; n - 1];
        for k in 0..n {
            let exact = -2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert_eq!(sturm_count(&diag, &off, exact - 1e-9), k);
            let x = refine_tridiagonal_eigenvalue(&diag, &off, exact + 1e-13, k);
            assert!((x - exact).abs() < 4e-16, "{x} vs {exact}");
        }
    }

    #[test]
    fn bisect_finds_cosine_peak() {
        let t = bisect_maximum(|x| -(x - 1.0).sin(), 0.5, 1.7, 1e-13);
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn peaks_include_rising_end() {
        assert_eq!(peak_brackets(&[0.0, 1.0, 0.5, 0.7]), vec![(1, 0, 2), (3, 2, 3)]);
    }
}
