//! Python bindings. Build with `maturin develop` (or `pip install .`) from this
//! directory; the module is importable as `cvnet`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cvnet_core::gaussian::{self, CovarianceMatrix};
use cvnet_core::measures::{self, LogBase};
use cvnet_core::{localize, montecarlo, optimize, sweep, teleport, verify};
use cvnet_core::{BiasRange, Error, Gain};
use nalgebra::DMatrix;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NumericalFailure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for cvnet_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn log_base(name: &str) -> PyResult<LogBase> {
    match name {
        "2" => Ok(LogBase::Two),
        "e" => Ok(LogBase::E),
        other => Err(PyValueError::new_err(format!("log_base must be '2' or 'e', got {other:?}"))),
    }
}

fn bias_range(unconstrained: bool) -> BiasRange {
    if unconstrained {
        BiasRange::Unconstrained
    } else {
        BiasRange::Constrained
    }
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<CovarianceMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    CovarianceMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).py()
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Symmetric N-mode resource with squeezing bias `d`.
#[pyclass(frozen, module = "cvnet")]
struct ResourceSpec {
    inner: gaussian::ResourceSpec,
}

#[pymethods]
impl ResourceSpec {
    /// `d=None` picks the optimal bias (clamped to `[-rbar, rbar]` unless `unconstrained`).
    #[new]
    #[pyo3(signature = (n_modes, rbar, n1=1.0, n2=1.0, d=None, unconstrained=false))]
    fn new(n_modes: usize, rbar: f64, n1: f64, n2: f64, d: Option<f64>, unconstrained: bool) -> PyResult<Self> {
        let class = gaussian::ResourceClass::new(n_modes, n1, n2, rbar).py()?;
        let d = match d {
            Some(d) => d,
            None => optimize::optimal_fidelity(&class, bias_range(unconstrained)).py()?.d_opt,
        };
        let inner = if unconstrained { class.with_bias_unconstrained(d) } else { class.with_bias(d) }.py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.n_modes()
    }

    #[getter]
    fn n1(&self) -> f64 {
        self.inner.n1()
    }

    #[getter]
    fn n2(&self) -> f64 {
        self.inner.n2()
    }

    #[getter]
    fn rbar(&self) -> f64 {
        self.inner.rbar()
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d()
    }

    #[getter]
    fn r1(&self) -> f64 {
        self.inner.r1()
    }

    #[getter]
    fn r2(&self) -> f64 {
        self.inner.r2()
    }

    /// Covariance matrix as nested lists, interleaved `(x1, p1, x2, p2, ...)`.
    fn covariance_matrix(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(to_rows(gaussian::build_resource(&self.inner).py()?.entries()))
    }

    /// Outcome of the protocol from `sender` to `receiver`; `gain=None` is optimal.
    #[pyo3(signature = (gain=None, sender=0, receiver=1))]
    fn fidelity<'py>(
        &self,
        py: Python<'py>,
        gain: Option<f64>,
        sender: usize,
        receiver: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let gain = gain.map_or(Gain::Optimal, Gain::Fixed);
        let params = teleport::ProtocolParams::new(sender, receiver, gain).py()?;
        let out = teleport::fidelity_network(&self.inner, &params).py()?;
        let dict = PyDict::new(py);
        dict.set_item("fidelity", out.fidelity)?;
        dict.set_item("var_x_rel", out.var_x_rel)?;
        dict.set_item("var_p_tot", out.var_p_tot)?;
        dict.set_item("gain", out.gain_used)?;
        Ok(dict)
    }

    #[pyo3(signature = (log_base="2"))]
    fn entanglement<'py>(&self, py: Python<'py>, log_base: &str) -> PyResult<Bound<'py, PyDict>> {
        let rep = measures::EntanglementReport::for_spec(&self.inner, self::log_base(log_base)?).py()?;
        let dict = PyDict::new(py);
        dict.set_item("eta", rep.eta)?;
        dict.set_item("eta_N", rep.eta_n)?;
        dict.set_item("E_F", rep.e_f)?;
        dict.set_item("E_T", rep.e_t)?;
        dict.set_item("E_F_loc", rep.e_f_loc)?;
        dict.set_item("E_tau", rep.e_tau)?;
        Ok(dict)
    }

    /// PPT eigenvalue of the pair (0, 1) after momentum detections on the rest.
    fn localizable_eta(&self) -> PyResult<f64> {
        localize::localizable_eta(&self.inner).py()
    }

    /// Sampled fidelity with optimal gain; returns mean, standard error and variances.
    #[pyo3(signature = (samples=1_000_000, seed=0))]
    fn monte_carlo<'py>(&self, py: Python<'py>, samples: u64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let config =
            montecarlo::McConfig { samples, seed, spec: self.inner, params: teleport::ProtocolParams::optimal() };
        let est = py.detach(|| montecarlo::simulate(&config)).py()?;
        let dict = PyDict::new(py);
        dict.set_item("fidelity_mean", est.fidelity_mean)?;
        dict.set_item("std_error", est.std_error)?;
        dict.set_item("var_x_rel", est.var_x_rel_hat)?;
        dict.set_item("var_p_tot", est.var_p_tot_hat)?;
        Ok(dict)
    }

    fn __repr__(&self) -> String {
        format!(
            "ResourceSpec(n_modes={}, rbar={}, n1={}, n2={}, d={})",
            self.inner.n_modes(),
            self.inner.rbar(),
            self.inner.n1(),
            self.inner.n2(),
            self.inner.d()
        )
    }
}

/// Closed-form optimum of the class: bias, gain, fidelity and `eta_N`.
#[pyfunction]
#[pyo3(signature = (n_modes, rbar, n1=1.0, n2=1.0, unconstrained=false))]
fn optimal_fidelity<'py>(
    py: Python<'py>,
    n_modes: usize,
    rbar: f64,
    n1: f64,
    n2: f64,
    unconstrained: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let class = gaussian::ResourceClass::new(n_modes, n1, n2, rbar).py()?;
    let res = optimize::optimal_fidelity(&class, bias_range(unconstrained)).py()?;
    let dict = PyDict::new(py);
    dict.set_item("d_opt", res.d_opt)?;
    dict.set_item("g_opt", res.g_opt)?;
    dict.set_item("fidelity", res.fidelity_opt)?;
    dict.set_item("eta_N", res.eta_n)?;
    dict.set_item("clamped", res.clamped)?;
    Ok(dict)
}

/// Symplectic eigenvalues of a covariance matrix, ascending.
#[pyfunction]
fn symplectic_eigenvalues(matrix: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    to_matrix(matrix)?.symplectic_eigenvalues().py()
}

/// Smallest symplectic eigenvalue of the partial transpose of a two-mode state.
#[pyfunction]
fn eta_two_mode(matrix: Vec<Vec<f64>>) -> PyResult<f64> {
    measures::eta_two_mode(&to_matrix(matrix)?).py()
}

/// Entanglement of formation of a symmetric two-mode state with PPT eigenvalue `eta`.
#[pyfunction]
#[pyo3(signature = (eta, log_base="2"))]
fn eof_symmetric(eta: f64, log_base: &str) -> PyResult<f64> {
    measures::eof_symmetric(eta, self::log_base(log_base)?).py()
}

/// Sweep table as a list of dicts keyed like the CLI CSV header.
#[pyfunction]
#[pyo3(signature = (n_list, rbar_min=0.0, rbar_max=2.0, steps=41, n1=1.0, n2=1.0, unconstrained=false, log_base="2"))]
#[allow(clippy::too_many_arguments)]
fn run_sweep<'py>(
    py: Python<'py>,
    n_list: Vec<usize>,
    rbar_min: f64,
    rbar_max: f64,
    steps: usize,
    n1: f64,
    n2: f64,
    unconstrained: bool,
    log_base: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = sweep::SweepConfig {
        n_list,
        n1,
        n2,
        rbar_min,
        rbar_max,
        steps,
        range: bias_range(unconstrained),
        log_base: self::log_base(log_base)?,
    };
    let rows = py.detach(|| sweep::run_sweep(&config)).py()?;
    rows.into_iter()
        .map(|r| {
            let dict = PyDict::new(py);
            dict.set_item("N", r.n_modes)?;
            dict.set_item("rbar", r.rbar)?;
            dict.set_item("F_opt", r.f_opt)?;
            dict.set_item("F_equal", r.f_equal)?;
            dict.set_item("F_unbiased", r.f_unbiased)?;
            dict.set_item("F_worst", r.f_worst)?;
            dict.set_item("eta_N", r.eta_n)?;
            dict.set_item("E_T", r.e_t)?;
            dict.set_item("E_F_loc", r.e_f_loc)?;
            dict.set_item("E_tau", r.e_tau)?;
            Ok(dict)
        })
        .collect()
}

/// Runs the cross-check suites; one dict per suite.
#[pyfunction]
#[pyo3(signature = (seed=2005, samples=200_000))]
fn run_verify<'py>(py: Python<'py>, seed: u64, samples: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = verify::VerifyConfig { seed, samples, inject_fault: false };
    let reports = py.detach(|| verify::run_verify(&config)).py()?;
    reports
        .into_iter()
        .map(|r| {
            let dict = PyDict::new(py);
            dict.set_item("suite", r.name)?;
            dict.set_item("max_deviation", r.max_deviation)?;
            dict.set_item("tolerance", r.tolerance)?;
            dict.set_item("passed", r.passed)?;
            dict.set_item("worst_point", r.worst_point)?;
            Ok(dict)
        })
        .collect()
}

#[pymodule]
fn cvnet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<ResourceSpec>()?;
    m.add_function(wrap_pyfunction!(optimal_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(symplectic_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(eta_two_mode, m)?)?;
    m.add_function(wrap_pyfunction!(eof_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
