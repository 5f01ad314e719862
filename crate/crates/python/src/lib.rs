//! Python module `revivalkit`: chain design and evolution, the triangle
//! lattice, and the scheme and polynomial checks. Reports come back as
//! plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use revivalkit::bivariate::{self, Rotation3, TratnikParams};
use revivalkit::combinatorics;
use revivalkit::dynamics::{self, ChainEvolution};
use revivalkit::orthopoly::{self, KrawtchoukParams, ParaKrawtchoukParams, RecurrenceCoefficients};
use revivalkit::spectral::{self, Spectrum};
use revivalkit::{hamming, ordered, C64};
use serde::Serialize;

fn err(e: revivalkit::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serialize through JSON into dicts, lists and floats.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// One-excitation XX chain: couplings J_1..J_N and fields B_0..B_N.
#[pyclass(name = "Chain", module = "revivalkit", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyChain {
    inner: RecurrenceCoefficients,
    evolution: ChainEvolution,
}

impl PyChain {
    fn wrap(inner: RecurrenceCoefficients) -> Self {
        let evolution = ChainEvolution::new(&inner);
        Self { inner, evolution }
    }
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (couplings, fields=None))]
    fn new(couplings: Vec<f64>, fields: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = match fields {
            Some(f) => RecurrenceCoefficients::new(couplings, f),
            None => RecurrenceCoefficients::from_couplings(couplings),
        }
        .map_err(err)?;
        Ok(Self::wrap(inner))
    }

    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.inner.couplings().to_vec()
    }

    #[getter]
    fn fields(&self) -> Vec<f64> {
        self.inner.fields().to_vec()
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        dynamics::eigendecompose(&self.inner).values
    }

    #[pyo3(signature = (tol=1e-8))]
    fn is_mirror_symmetric(&self, tol: f64) -> bool {
        spectral::mirror_symmetric(&self.inner, tol)
    }

    /// Amplitudes <e_k| exp(-itJ) |e_source> for every site k.
    #[pyo3(signature = (t, source=0))]
    fn evolve(&self, t: f64, source: usize) -> PyResult<Vec<C64>> {
        self.evolution.amplitudes(t, source).map_err(err)
    }

    #[pyo3(signature = (t_max, grid=dynamics::DEFAULT_GRID, tol=dynamics::DEFAULT_TOL))]
    fn detect_pst<'py>(&self, py: Python<'py>, t_max: f64, grid: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &dynamics::detect_pst(&self.inner, t_max, grid, tol).map_err(err)?)
    }

    #[pyo3(signature = (t, tol=dynamics::DEFAULT_TOL))]
    fn detect_fr<'py>(&self, py: Python<'py>, t: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &dynamics::detect_fr(&self.inner, t, tol).map_err(err)?)
    }

    fn __len__(&self) -> usize {
        self.inner.n_sites()
    }

    fn __repr__(&self) -> String {
        format!("Chain(couplings={:?}, fields={:?})", self.inner.couplings(), self.inner.fields())
    }
}

#[pyfunction]
#[pyo3(signature = (n, beta=1.0))]
fn krawtchouk_chain(n: usize, beta: f64) -> PyResult<PyChain> {
    orthopoly::krawtchouk_chain(n, beta).map(PyChain::wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, delta, beta=1.0))]
fn para_krawtchouk_chain(n: usize, delta: f64, beta: f64) -> PyResult<PyChain> {
    let params = ParaKrawtchoukParams::new(n, beta, delta).map_err(err)?;
    orthopoly::para_krawtchouk_chain(&params).map(PyChain::wrap).map_err(err)
}

#[pyfunction]
fn krawtchouk_eval(degree: usize, x: f64, n: usize, p: f64) -> PyResult<f64> {
    let params = KrawtchoukParams::new(n, p).map_err(err)?;
    orthopoly::krawtchouk_eval(degree, x, &params).map_err(err)
}

#[pyfunction]
fn bilattice_spectrum(n: usize, beta: f64, delta: f64) -> PyResult<Vec<f64>> {
    spectral::bilattice_spectrum(n, beta, delta).map(Vec::from).map_err(err)
}

/// Persymmetric chain with the given strictly increasing spectrum.
#[pyfunction]
fn reconstruct_jacobi(spectrum: Vec<f64>) -> PyResult<PyChain> {
    let spec = Spectrum::new(spectrum).map_err(err)?;
    spectral::reconstruct_jacobi(&spec).map(PyChain::wrap).map_err(err)
}

#[pyfunction]
fn check_fr_condition<'py>(py: Python<'py>, spectrum: Vec<f64>, t: f64) -> PyResult<Bound<'py, PyAny>> {
    let spec = Spectrum::new(spectrum).map_err(err)?;
    to_py(py, &spectral::check_fr_condition(&spec, t).map_err(err)?)
}

#[pyfunction]
fn triangle_points(n: usize) -> Vec<(usize, usize)> {
    combinatorics::triangle_points(n)
}

/// Amplitudes from the apex on the triangle, one list per time in
/// `triangle_points` order.
#[pyfunction]
#[pyo3(signature = (n, alpha, beta, times, closed_form=false))]
fn triangle_amplitudes(n: usize, alpha: f64, beta: f64, times: Vec<f64>, closed_form: bool) -> PyResult<Vec<Vec<C64>>> {
    let grid = if closed_form {
        ordered::AmplitudeGrid::closed_form(n, alpha, beta, &times).map_err(err)?
    } else {
        ordered::AmplitudeGrid::evolved(&ordered::triangle_hamiltonian(n, alpha, beta).map_err(err)?, &times)
    };
    Ok((0..times.len()).map(|k| grid.row(k).to_vec()).collect())
}

#[pyfunction]
fn closed_form_amplitude(n: usize, alpha: f64, beta: f64, t: f64, k: usize, l: usize) -> PyResult<C64> {
    ordered::closed_form_amplitude(n, alpha, beta, t, k, l).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, alpha, beta, t_max, tol=1e-9))]
fn detect_2d_transfer<'py>(
    py: Python<'py>,
    n: usize,
    alpha: f64,
    beta: f64,
    t_max: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ordered::detect_2d_transfer(n, alpha, beta, t_max, tol).map_err(err)?)
}

#[pyfunction]
fn verify_bose_mesner<'py>(py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &hamming::verify_bose_mesner(n).map_err(err)?)
}

#[pyfunction]
fn verify_ordered_bose_mesner<'py>(py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ordered::verify_ordered_bose_mesner(n).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (n, alpha, beta, t))]
fn project_ordered_walk<'py>(py: Python<'py>, n: usize, alpha: f64, beta: f64, t: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ordered::project_ordered_walk(n, alpha, beta, t).map_err(err)?)
}

#[pyfunction]
fn tratnik_eval(n: usize, p: f64, q: f64, index: (usize, usize), point: (f64, f64)) -> PyResult<f64> {
    let params = TratnikParams::new(n, p, q).map_err(err)?;
    bivariate::tratnik_eval(&params, index, point).map_err(err)
}

#[pyfunction]
fn trinomial_weight(n: usize, p: f64, q: f64, x: usize, y: usize) -> PyResult<f64> {
    let params = TratnikParams::new(n, p, q).map_err(err)?;
    bivariate::trinomial_weight(&params, x, y).map_err(err)
}

/// Seven-term recurrence check for a 3×3 rotation given as nested rows.
#[pyfunction]
fn verify_seven_term<'py>(py: Python<'py>, rotation: [[f64; 3]; 3], n: usize) -> PyResult<Bound<'py, PyAny>> {
    let r = Rotation3::new(rotation).map_err(err)?;
    to_py(py, &bivariate::verify_seven_term(&r, n).map_err(err)?)
}

#[pymodule(name = "revivalkit")]
pub fn revivalkit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(krawtchouk_chain, m)?)?;
    m.add_function(wrap_pyfunction!(para_krawtchouk_chain, m)?)?;
    m.add_function(wrap_pyfunction!(krawtchouk_eval, m)?)?;
    m.add_function(wrap_pyfunction!(bilattice_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(check_fr_condition, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_points, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(detect_2d_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bose_mesner, m)?)?;
    m.add_function(wrap_pyfunction!(verify_ordered_bose_mesner, m)?)?;
    m.add_function(wrap_pyfunction!(project_ordered_walk, m)?)?;
    m.add_function(wrap_pyfunction!(tratnik_eval, m)?)?;
    m.add_function(wrap_pyfunction!(trinomial_weight, m)?)?;
    m.add_function(wrap_pyfunction!(verify_seven_term, m)?)?;
    Ok(())
}
