use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use steklov_core::dtn;
use steklov_core::harmonics::{self, AngularPoint};
use steklov_core::perturbation::{self, ClosedFormEngine, PerturbationFunction as CorePerturbation, Route};
use steklov_core::wigner::{self as core_wigner, ThreeJ};
use steklov_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::InvalidIndex(_) | Error::InvalidPoint(_) | Error::InvalidPerturbation(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_route(route: &str) -> PyResult<Route> {
    match route {
        "wigner" => Ok(Route::Wigner),
        "quadrature" => Ok(Route::Quadrature),
        other => Err(PyValueError::new_err(format!("unknown route {other:?}; expected 'wigner' or 'quadrature'"))),
    }
}

fn point(angles: Vec<f64>) -> PyResult<AngularPoint> {
    AngularPoint::new(angles).map_err(to_py)
}

/// Degree `l` and tuple `(m_1, ..., m_{d-1})` of one hyperspherical harmonic.
#[pyclass(name = "HarmonicIndex", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyHarmonicIndex(harmonics::HarmonicIndex);

#[pymethods]
impl PyHarmonicIndex {
    #[new]
    fn new(l: u32, m: Vec<i32>) -> PyResult<Self> {
        harmonics::HarmonicIndex::new(l, m).map(Self).map_err(to_py)
    }

    #[getter]
    fn l(&self) -> u32 {
        self.0.degree()
    }

    #[getter]
    fn m(&self) -> Vec<i32> {
        self.0.tuple().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval_complex(&self, angles: Vec<f64>) -> PyResult<Complex64> {
        harmonics::eval_complex(&self.0, &point(angles)?).map_err(to_py)
    }

    fn eval_real(&self, angles: Vec<f64>) -> PyResult<f64> {
        harmonics::eval_real(&self.0, &point(angles)?).map_err(to_py)
    }

    /// Orthonormal-frame components of the surface gradient of the complex harmonic.
    fn gradient(&self, angles: Vec<f64>) -> PyResult<Vec<Complex64>> {
        harmonics::eval_gradient(&self.0, &point(angles)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("HarmonicIndex(l={}, m={:?})", self.0.degree(), self.0.tuple())
    }
}

/// Band-limited real perturbation `rho = sum A_{p,q} Y_{p,q}`.
#[pyclass(name = "Perturbation", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPerturbation(CorePerturbation);

#[pymethods]
impl PyPerturbation {
    /// `terms` is a list of `(p, q, A)`.
    #[new]
    fn new(d: usize, terms: Vec<(u32, Vec<i32>, f64)>) -> PyResult<Self> {
        let terms = terms
            .into_iter()
            .map(|(p, q, a)| harmonics::HarmonicIndex::new(p, q).map(|i| (i, a)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)?;
        CorePerturbation::new(d, terms).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CorePerturbation::from_json(text).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn constant(d: usize) -> Self {
        Self(CorePerturbation::constant(d))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn band(&self) -> u32 {
        self.0.band()
    }

    #[getter]
    fn a01(&self) -> f64 {
        self.0.a01()
    }

    fn eval(&self, angles: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&point(angles)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Perturbation({})", self.0.to_json())
    }
}

#[pyfunction]
fn multiplicity(d: usize, l: u32) -> u64 {
    harmonics::multiplicity(d, l)
}

#[pyfunction]
fn enumerate_indices(d: usize, l: u32) -> Vec<PyHarmonicIndex> {
    harmonics::enumerate_indices(d, l).into_iter().map(PyHarmonicIndex).collect()
}

/// First-order matrix `M^(d,k)` as a list of rows of complex numbers.
#[pyfunction]
#[pyo3(signature = (rho, k, route = "wigner"))]
fn assemble_matrix(rho: &PyPerturbation, k: u32, route: &str) -> PyResult<Vec<Vec<Complex64>>> {
    let m = perturbation::assemble_matrix(parse_route(route)?, k, &rho.0).map_err(to_py)?;
    let n = m.size();
    Ok((0..n).map(|i| m.matrix.row(i).to_vec()).collect())
}

/// Spectrum report as a dict with `lambda1`, `e`, `scalar_part`, `trace_residual`,
/// `index_range`, `clusters` and `Lambda1`.
#[pyfunction]
#[pyo3(signature = (rho, k, route = "wigner"))]
fn spectrum<'py>(py: Python<'py>, rho: &PyPerturbation, k: u32, route: &str) -> PyResult<Bound<'py, PyAny>> {
    let m = perturbation::assemble_matrix(parse_route(route)?, k, &rho.0).map_err(to_py)?;
    let report = perturbation::eigen_spectrum(&m, rho.0.a01()).map_err(to_py)?;
    let lambda1: Vec<f64> = perturbation::normalized_expansion(&report).into_iter().map(|p| p.1).collect();
    let out = json_to_py(py, &report)?;
    out.set_item("Lambda1", lambda1)?;
    Ok(out)
}

/// Exact 3j symbol as `(value, sign, radicand)` with the radicand as a fraction string.
#[pyfunction]
fn wigner3j(j1: u32, j2: u32, j3: u32, m1: i32, m2: i32, m3: i32) -> (f64, i8, String) {
    let w = core_wigner::wigner3j(&ThreeJ::new(j1, j2, j3, m1, m2, m3));
    (w.to_f64(), w.sign(), w.radicand().to_string())
}

/// Central-difference slope study of the direct Steklov solve.
#[pyfunction]
#[pyo3(signature = (rho, k, eps = vec![4e-3, 2e-3, 1e-3], band_limit = None))]
fn oracle_slope<'py>(py: Python<'py>, rho: &PyPerturbation, k: u32, eps: Vec<f64>, band_limit: Option<u32>) -> PyResult<Bound<'py, PyAny>> {
    let study = dtn::slope_study(&rho.0, k, &eps, band_limit).map_err(to_py)?;
    json_to_py(py, &study)
}

/// Degree-`k` cluster of the direct solve at one `eps`.
#[pyfunction]
#[pyo3(signature = (rho, k, eps, band_limit = None))]
fn steklov_cluster(rho: &PyPerturbation, k: u32, eps: f64, band_limit: Option<u32>) -> PyResult<(Vec<f64>, f64)> {
    let c = dtn::cluster_at(&rho.0, k, eps, band_limit).map_err(to_py)?;
    Ok((c.values, c.max_imag))
}

#[pyfunction]
fn diagnose_p2k<'py>(py: Python<'py>, d: usize, k: u32, xi: u32) -> PyResult<Bound<'py, PyAny>> {
    let diag = perturbation::diagnose_p2k(&mut ClosedFormEngine::new(), d, k, xi).map_err(to_py)?;
    json_to_py(py, &diag)
}

#[pymodule]
fn steklov(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHarmonicIndex>()?;
    m.add_class::<PyPerturbation>()?;
    m.add_function(wrap_pyfunction!(multiplicity, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_indices, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(wigner3j, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_slope, m)?)?;
    m.add_function(wrap_pyfunction!(steklov_cluster, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose_p2k, m)?)?;
    Ok(())
}
