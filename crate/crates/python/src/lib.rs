//! Python bindings: cavity configuration, hop weights, time evolution by
//! either method, and the mode functions.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ellipseqed::cli;
use ellipseqed::modes::{ModeFunction, ModeKind, SpheroidalParams};
use ellipseqed::oracle::{self, LaplaceOptions, SpectralFunction};
use ellipseqed::pathsum::{self, AmplitudeState, TimeSeries, Truncation};
use ellipseqed::quantization::{self, QuantizationData};
use ellipseqed::Error;

fn py_err(e: Error) -> PyErr {
    match cli::exit_code(&e) {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "CavityConfig", frozen, from_py_object)]
#[derive(Clone)]
struct PyCavity {
    inner: ellipseqed::CavityConfig,
}

#[pymethods]
impl PyCavity {
    #[new]
    #[pyo3(signature = (eps, kappa_eg, gamma_tau, phase_d = 0.0, phase_f = 0.0))]
    fn new(eps: f64, kappa_eg: f64, gamma_tau: f64, phase_d: f64, phase_f: f64) -> PyResult<Self> {
        let inner = ellipseqed::CavityConfig::new(eps, kappa_eg, gamma_tau, phase_d, phase_f).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eccentricity
    }

    #[getter]
    fn kappa_eg(&self) -> f64 {
        self.inner.kappa_eg
    }

    #[getter]
    fn gamma_tau(&self) -> f64 {
        self.inner.gamma_tau
    }

    #[getter]
    fn f_over_d(&self) -> f64 {
        self.inner.f_over_d()
    }

    #[getter]
    fn xi_boundary(&self) -> f64 {
        self.inner.xi_boundary()
    }

    /// Hop delay in units of τ for `2N₁ = two_n1`.
    fn delay(&self, two_n1: u32, n2: u32) -> f64 {
        self.inner.delay(two_n1, n2)
    }

    /// `Γ/Γ_free` from the semiclassical normalisation.
    fn gamma_ratio(&self) -> PyResult<f64> {
        Ok(QuantizationData::from_config(&self.inner).map_err(py_err)?.gamma_ratio)
    }

    /// Signed `A_{N₁,N₂}/Γ`.
    fn path_weight(&self, two_n1: u32, n2: u32) -> PyResult<f64> {
        let qd = QuantizationData::from_config(&self.inner).map_err(py_err)?;
        quantization::path_weight(two_n1, n2, 1.0, &qd).map_err(py_err)
    }

    /// `[(N1, N2, s_alpha, weight_over_gamma, delay), ...]`
    #[pyo3(signature = (delay_cutoff = 3.0, weight_floor = 1e-12))]
    fn weight_table(&self, delay_cutoff: f64, weight_floor: f64) -> PyResult<Vec<(f64, u32, f64, f64, f64)>> {
        let qd = QuantizationData::from_config(&self.inner).map_err(py_err)?;
        let t = quantization::build_weight_table(&self.inner, &qd, delay_cutoff, weight_floor).map_err(py_err)?;
        Ok(t.entries.iter().map(|e| (e.n1(), e.n2, e.s_alpha, e.weight_over_gamma, e.delay)).collect())
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "CavityConfig(eps={}, kappa_eg={}, gamma_tau={}, phase_d={}, phase_f={})",
            c.eccentricity, c.kappa_eg, c.gamma_tau, c.phase_d, c.phase_f
        )
    }
}

fn series_dict<'py>(py: Python<'py>, s: &TimeSeries) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", s.method)?;
    d.set_item("t", s.t.clone())?;
    d.set_item("p1", s.p1.clone())?;
    d.set_item("p2", s.p2.clone())?;
    d.set_item("b1", s.b1.clone())?;
    d.set_item("b2", s.b2.clone())?;
    if let Some(tr) = &s.truncation {
        d.set_item("path_classes", tr.path_classes)?;
        d.set_item("tail_probability", tr.tail_probability)?;
    }
    Ok(d)
}

/// Amplitudes and probabilities on a uniform grid `[0, t_max]`.
///
/// `method` is `"pathsum"` or `"laplace"`; `init` is `(b1, b2)` and is
/// normalised.
#[pyfunction]
#[pyo3(signature = (cavity, t_max, points = 301, init = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)), method = "pathsum", weight_floor = 1e-12, delay_cutoff = None))]
fn simulate<'py>(
    py: Python<'py>,
    cavity: &PyCavity,
    t_max: f64,
    points: usize,
    init: (Complex64, Complex64),
    method: &str,
    weight_floor: f64,
    delay_cutoff: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let state = AmplitudeState::normalized(init.0, init.1).map_err(py_err)?;
    let grid = pathsum::uniform_grid(t_max, points).map_err(py_err)?;
    let cutoff = delay_cutoff.unwrap_or(t_max.max(1.0));
    let cfg = cavity.inner;
    let series = py
        .detach(|| -> Result<TimeSeries, Error> {
            match method {
                "pathsum" => {
                    let tr = Truncation { delay_cutoff: cutoff, weight_floor, ..Truncation::for_horizon(t_max) };
                    pathsum::simulate(&cfg, state, &grid, tr)
                }
                "laplace" => {
                    let sf = SpectralFunction::from_config(&cfg, cutoff, weight_floor)?;
                    Ok(oracle::inverse_laplace(&sf, state, &grid, LaplaceOptions::default())?.0)
                }
                other => Err(Error::Config(format!("method: expected pathsum or laplace, got `{other}`"))),
            }
        })
        .map_err(py_err)?;
    series_dict(py, &series)
}

/// Run a named preset; returns one dict per method.
#[pyfunction]
#[pyo3(signature = (name, method = "pathsum"))]
fn run_preset<'py>(py: Python<'py>, name: &str, method: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut sc = cli::preset(name).map_err(py_err)?;
    sc.method = method.parse().map_err(py_err)?;
    let run = py.detach(|| cli::run_scenario(&sc)).map_err(py_err)?;
    run.results.iter().map(|r| series_dict(py, &r.series)).collect()
}

/// `[(name, description), ...]`
#[pyfunction]
fn presets() -> Vec<(&'static str, &'static str)> {
    cli::presets().iter().map(|p| (p.name, p.description)).collect()
}

/// `(P1, P2)` for resonant single-mode exchange with vacuum Rabi
/// frequency `omega0`.
#[pyfunction]
#[pyo3(signature = (omega0, t, init = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))))]
fn single_mode_reference(omega0: f64, t: f64, init: (Complex64, Complex64)) -> PyResult<(f64, f64)> {
    let state = AmplitudeState::normalized(init.0, init.1).map_err(py_err)?;
    Ok(oracle::single_mode_reference(omega0, t, state))
}

/// Radial (`"radial"`, coordinate ξ) or angular (`"angular"`, η) mode
/// function evaluated by `"exact"` (α = 0), `"jwkb"` (radial) or `"ode"`.
#[pyfunction]
#[pyo3(signature = (coords, kappa, alpha = 0.0, kind = "radial", method = "exact"))]
fn mode_function(coords: Vec<f64>, kappa: f64, alpha: f64, kind: &str, method: &str) -> PyResult<Vec<f64>> {
    let p = SpheroidalParams::new(kappa, alpha).map_err(py_err)?;
    let kind = match kind {
        "radial" => ModeKind::RadialF,
        "angular" => ModeKind::AngularG,
        other => return Err(PyValueError::new_err(format!("kind: expected radial or angular, got `{other}`"))),
    };
    let mf = match (method, kind) {
        ("exact", _) => ModeFunction::exact(p, kind),
        ("jwkb", ModeKind::RadialF) => ModeFunction::jwkb(p),
        ("ode", _) => ModeFunction::ode_oracle(p, kind, &coords),
        _ => return Err(PyValueError::new_err(format!("method `{method}` is not available here"))),
    }
    .map_err(py_err)?;
    coords.iter().map(|&c| mf.eval(c).map_err(py_err)).collect()
}

#[pymodule]
fn ellipseqed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", cli::VERSION)?;
    m.add_class::<PyCavity>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(single_mode_reference, m)?)?;
    m.add_function(wrap_pyfunction!(mode_function, m)?)?;
    Ok(())
}
