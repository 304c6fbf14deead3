//! Python bindings.
//!
//! Structured results are returned as plain dicts and lists. Errors raise
//! `mptrap.MptrapError`; invalid configurations raise `ValueError`.

use mptrap_core::error::Error;
use mptrap_core::geodesic::{self, Covector, GeodesicOptions, PhasePoint};
use mptrap_core::geometry::{self, ChartPoint, SchwParams as CoreSchw};
use mptrap_core::harness::{self, RunConfig, Task};
use mptrap_core::schw_multiplier::{quadform, MultiplierConfig, MultiplierProfile as CoreProfile};
use mptrap_core::trapping;
use mptrap_core::wavesolver::{self, WaveRun};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(mptrap, MptrapError, PyException);

fn err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::NakedSingularity(_) => PyValueError::new_err(e.to_string()),
        _ => MptrapError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| MptrapError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let s: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Myers-Perry parameters `(r_s, a, b)`.
#[pyclass(frozen, skip_from_py_object, module = "mptrap")]
#[derive(Clone, Copy)]
struct BlackHoleParams(geometry::BlackHoleParams);

#[pymethods]
impl BlackHoleParams {
    #[new]
    #[pyo3(signature = (r_s = 1.0, a = 0.0, b = 0.0))]
    fn new(r_s: f64, a: f64, b: f64) -> PyResult<Self> {
        geometry::BlackHoleParams::new(r_s, a, b).map(Self).map_err(err)
    }

    #[getter]
    fn r_s(&self) -> f64 {
        self.0.r_s
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b
    }

    /// Horizon and photon-sphere data as a dict.
    fn horizons<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &geometry::horizons(&self.0).map_err(err)?)
    }

    fn covariant(&self, r: f64, theta: f64) -> [[f64; 5]; 5] {
        geometry::covariant(&self.0, r * r, theta)
    }

    fn contravariant(&self, r: f64, theta: f64) -> [[f64; 5]; 5] {
        geometry::contravariant(&self.0, r * r, theta)
    }

    /// Max-norm of `g g^-1 - I` at `(r, theta)`.
    fn inversion_defect(&self, r: f64, theta: f64) -> PyResult<f64> {
        geometry::inversion_defect(&self.0, r * r, theta).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("BlackHoleParams(r_s={}, a={}, b={})", self.0.r_s, self.0.a, self.0.b)
    }
}

/// Schwarzschild-Tangherlini parameters: radius `r_s` and `d` extra dimensions.
#[pyclass(frozen, skip_from_py_object, module = "mptrap")]
#[derive(Clone, Copy)]
struct SchwParams(CoreSchw);

#[pymethods]
impl SchwParams {
    #[new]
    #[pyo3(signature = (r_s = 1.0, d = 1))]
    fn new(r_s: f64, d: u32) -> PyResult<Self> {
        CoreSchw::new(r_s, d).map(Self).map_err(err)
    }

    #[getter]
    fn r_s(&self) -> f64 {
        self.0.r_s
    }

    #[getter]
    fn d(&self) -> u32 {
        self.0.d
    }

    #[getter]
    fn r_ps(&self) -> f64 {
        self.0.r_ps()
    }

    fn __repr__(&self) -> String {
        format!("SchwParams(r_s={}, d={})", self.0.r_s, self.0.d)
    }
}

/// The radial multiplier profile on a Schwarzschild-Tangherlini background.
#[pyclass(frozen, module = "mptrap")]
struct MultiplierProfile(CoreProfile);

#[pymethods]
impl MultiplierProfile {
    /// `config` is a dict of profile settings; omitted keys take defaults.
    #[new]
    #[pyo3(signature = (params, config = None))]
    fn new(params: &SchwParams, config: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let cfg: MultiplierConfig = match config {
            Some(c) => from_py(c)?,
            None => MultiplierConfig::default(),
        };
        CoreProfile::build(params.0, cfg).map(Self).map_err(err)
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps
    }

    /// Profile values at `r` as a dict keyed like the profile CSV.
    fn row<'py>(&self, py: Python<'py>, r: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.row(r))
    }

    /// Smallest eigenvalue of the bulk form on a grid over `[r_lo, r_hi]`,
    /// whatever its sign.
    #[pyo3(signature = (r_lo, r_hi, n = 2000))]
    fn positivity<'py>(&self, py: Python<'py>, r_lo: f64, r_hi: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
        let rep = py.detach(|| quadform::scan_positivity(&self.0, r_lo, r_hi, n));
        to_py(py, &rep)
    }
}

/// Simple root of `R` in `r` for the covector `(tau, Phi, Psi)`.
#[pyfunction]
fn trapped_radius<'py>(
    py: Python<'py>,
    params: &BlackHoleParams,
    tau: f64,
    phi: f64,
    psi: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &trapping::trapped_radius(&params.0, tau, phi, psi).map_err(err)?)
}

/// Trapped sphere `(x0, k_hat)` at unit energy for angular momenta `(phi_hat, psi_hat)`.
#[pyfunction]
#[pyo3(signature = (params, phi_hat = 0.0, psi_hat = 0.0))]
fn trapped_sphere<'py>(
    py: Python<'py>,
    params: &BlackHoleParams,
    phi_hat: f64,
    psi_hat: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &geodesic::trapped_sphere(&params.0, phi_hat, psi_hat).map_err(err)?)
}

/// Residual of the radial derivative identity for `rho^2 p` at one phase point.
#[pyfunction]
fn rderiv_residual(params: &BlackHoleParams, r: f64, theta: f64, k: [f64; 5]) -> f64 {
    trapping::rderiv_residual(&params.0, r, theta, k)
}

/// Integrates the null geodesic from `position = (t, r, theta, phi, psi)` with
/// momentum `(tau, Phi, Psi)` and `Theta`; the radial momentum is solved from
/// `p = 0` and taken outgoing unless `ingoing` is set.
#[pyfunction]
#[pyo3(signature = (params, position, tau, theta_mom, phi, psi, span, ingoing = false, tol = 1e-10, r_escape = 1e4, h_max = 0.05))]
#[allow(clippy::too_many_arguments)]
fn integrate_geodesic<'py>(
    py: Python<'py>,
    params: &BlackHoleParams,
    position: [f64; 5],
    tau: f64,
    theta_mom: f64,
    phi: f64,
    psi: f64,
    span: f64,
    ingoing: bool,
    tol: f64,
    r_escape: f64,
    h_max: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params.0;
    let [t, r, th, ph, ps] = position;
    let pos = ChartPoint { t, x: r * r, theta: th, phi: ph, psi: ps };
    let mut k = Covector { tau, xi_x: 0.0, theta: theta_mom, phi, psi };
    let xi = geodesic::null_xi(&p, pos.x, th, &k).map_err(err)?;
    k.xi_x = if ingoing { -xi } else { xi };
    let init = PhasePoint { position: pos, momentum: k };
    let opts = GeodesicOptions { tol, r_escape, h_max };
    let tr = py.detach(|| geodesic::integrate_geodesic(&p, &init, span, opts)).map_err(err)?;
    to_py(py, &tr)
}

/// Evolves one angular mode. `run` is a dict with solver domain, initial
/// data and forcing; omitted keys take defaults.
#[pyfunction]
#[pyo3(signature = (params, run = None))]
fn run_wave<'py>(py: Python<'py>, params: &SchwParams, run: Option<&Bound<'_, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let run: WaveRun = match run {
        Some(r) => from_py(r)?,
        None => WaveRun::default(),
    };
    let sp = params.0;
    let res = py.detach(|| wavesolver::run_wave(sp, &run)).map_err(err)?;
    to_py(py, &res)
}

/// Default run configuration as a dict.
#[pyfunction]
fn default_config(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &RunConfig::default())
}

/// Runs a verification task and returns its report as a dict. When `out`
/// is given, the report and tables are also written there.
#[pyfunction]
#[pyo3(signature = (task, config = None, out = None))]
fn run_task<'py>(
    py: Python<'py>,
    task: &str,
    config: Option<&Bound<'_, PyAny>>,
    out: Option<std::path::PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let task: Task = serde_json::from_value(serde_json::Value::String(task.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown task {task:?}")))?;
    let cfg = match config {
        Some(c) => {
            let s: String = py.import("json")?.call_method1("dumps", (c,))?.extract()?;
            RunConfig::from_json(&s).map_err(err)?
        }
        None => RunConfig::default(),
    };
    let res = py.detach(|| {
        let res = harness::run(&cfg, task);
        let written = out.map(|dir| harness::emit(&res.report, &res.artifacts, &dir)).transpose();
        written.map(|_| res)
    });
    to_py(py, &res.map_err(err)?.report)
}

#[pymodule]
fn mptrap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MptrapError", m.py().get_type::<MptrapError>())?;
    m.add_class::<BlackHoleParams>()?;
    m.add_class::<SchwParams>()?;
    m.add_class::<MultiplierProfile>()?;
    m.add_function(wrap_pyfunction!(trapped_radius, m)?)?;
    m.add_function(wrap_pyfunction!(trapped_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(rderiv_residual, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(run_wave, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_task, m)?)?;
    Ok(())
}
