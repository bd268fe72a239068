//! Python module `ars`: frames, geodesics, mode spectra, self-adjointness,
//! the transmission study and Martinet mode solves.
//!
//! Invalid input raises `ValueError`; numerical failures (energy drift,
//! solver stalls, inconclusive studies) raise `RuntimeError`.

use almost_riemannian::evolution::{self, StudyOptions};
use almost_riemannian::geodesics::{self, CotangentState, FlowOptions, FrontOptions, FrontStart};
use almost_riemannian::spectral::{self, SpectrumGrid};
use almost_riemannian::{martinet, CurveLength, CurveSample, EvolutionError, FrameError, FrameSpec, GeodesicError, PhiPreset, Point, SpectralError};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn frame_err(e: FrameError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn geodesic_err(e: GeodesicError) -> PyErr {
    match e {
        GeodesicError::StepSizeTooLarge { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn spectral_err(e: SpectralError) -> PyErr {
    match e {
        SpectralError::ConvergenceFailure { .. } | SpectralError::FitIllConditioned { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn evolution_err(e: EvolutionError) -> PyErr {
    match e {
        EvolutionError::SolverDiverged { .. } | EvolutionError::Inconclusive { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A planar frame. Build one with the static constructors.
#[pyclass(name = "Frame", frozen)]
struct PyFrame {
    inner: FrameSpec,
}

#[pymethods]
impl PyFrame {
    /// `X1 = d/dx`, `X2 = x d/dy`.
    #[staticmethod]
    fn grushin() -> Self {
        Self { inner: FrameSpec::grushin() }
    }

    /// `X2 = exp(phi) d/dy` with a Gaussian bump `phi`.
    #[staticmethod]
    #[pyo3(signature = (amplitude=0.0, sigma=1.0))]
    fn f1(amplitude: f64, sigma: f64) -> Self {
        Self { inner: FrameSpec::f1(PhiPreset::gaussian_bump(amplitude, sigma)) }
    }

    /// `X2 = x exp(phi) d/dy` with a Gaussian bump `phi`.
    #[staticmethod]
    #[pyo3(signature = (amplitude=0.0, sigma=1.0))]
    fn f2(amplitude: f64, sigma: f64) -> Self {
        Self { inner: FrameSpec::f2(PhiPreset::gaussian_bump(amplitude, sigma)) }
    }

    /// `X2 = |x|^alpha d/dy`.
    #[staticmethod]
    fn alpha_grushin(alpha: f64) -> PyResult<Self> {
        FrameSpec::alpha_grushin(alpha).map(|inner| Self { inner }).map_err(frame_err)
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.kind.name()
    }

    /// Dict with `g11`, `g22`, `omega`, `curvature`, `f`, `f_x`.
    fn metric<'py>(&self, py: Python<'py>, x: f64, y: f64) -> PyResult<Bound<'py, PyDict>> {
        let m = self.inner.metric_at(Point::new(x, y)).map_err(frame_err)?;
        let d = PyDict::new(py);
        d.set_item("g11", m.g11)?;
        d.set_item("g22", m.g22)?;
        d.set_item("omega", m.omega)?;
        d.set_item("curvature", m.curvature)?;
        d.set_item("f", m.f_value)?;
        d.set_item("f_x", m.f_x)?;
        Ok(d)
    }

    fn curvature(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.metric_at(Point::new(x, y)).map(|m| m.curvature).map_err(frame_err)
    }

    /// Length of the sampled curve `[(t, x, y), ...]`; `inf` when it is not
    /// admissible.
    fn curve_length(&self, samples: Vec<(f64, f64, f64)>) -> PyResult<f64> {
        let s: Vec<CurveSample> = samples.into_iter().map(|(t, x, y)| CurveSample::new(t, x, y)).collect();
        match self.inner.curve_length(&s).map_err(frame_err)? {
            CurveLength::Finite { length } => Ok(length),
            CurveLength::Infinite { .. } => Ok(f64::INFINITY),
        }
    }

    fn hamiltonian(&self, x: f64, y: f64, lambda1: f64, lambda2: f64) -> PyResult<f64> {
        geodesics::hamiltonian(&self.inner, &CotangentState::new(x, y, lambda1, lambda2)).map_err(frame_err)
    }

    fn __repr__(&self) -> String {
        format!("Frame({})", self.inner.kind.name())
    }
}

/// Integrates the geodesic flow. Returns a dict with `t`, `states`
/// (`[(x, y, lambda1, lambda2), ...]`), `crossings` (`[(t, direction), ...]`)
/// and `max_energy_drift`.
#[pyfunction]
#[pyo3(signature = (frame, x, y, lambda1, lambda2, t_final, dt=1e-4, tol_h=1e-8))]
#[allow(clippy::too_many_arguments)]
fn geodesic<'py>(
    py: Python<'py>,
    frame: &PyFrame,
    x: f64,
    y: f64,
    lambda1: f64,
    lambda2: f64,
    t_final: f64,
    dt: f64,
    tol_h: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s0 = CotangentState::new(x, y, lambda1, lambda2);
    let traj = py
        .detach(|| geodesics::geodesic_flow_with(&frame.inner, s0, t_final, dt, &FlowOptions { tol_h }))
        .map_err(geodesic_err)?;
    let d = PyDict::new(py);
    d.set_item("t", (0..traj.states.len()).map(|i| traj.time(i)).collect::<Vec<_>>())?;
    d.set_item("states", traj.states.iter().map(|s| (s.x, s.y, s.lambda1, s.lambda2)).collect::<Vec<_>>())?;
    d.set_item("crossings", traj.crossings.iter().map(|c| (c.t, c.direction)).collect::<Vec<_>>())?;
    d.set_item("max_energy_drift", traj.max_energy_drift)?;
    Ok(d)
}

/// Closed-form Grushin geodesic from the origin with `lambda1 = sign`,
/// `lambda2 = a`.
#[pyfunction]
fn grushin_geodesic_origin(a: f64, sign: f64, t: f64) -> (f64, f64) {
    let p = geodesics::grushin_geodesic_origin(a, sign, t);
    (p.x, p.y)
}

/// Front at time `t_final` as `[(param, sign, x, y), ...]`. With
/// `singular=True` the start is `(0, y)`.
#[pyfunction]
#[pyo3(signature = (frame, t_final, n=401, x=0.0, y=0.0, singular=true, a_max=15.0, dt=1e-4))]
#[allow(clippy::too_many_arguments)]
fn front(py: Python<'_>, frame: &PyFrame, t_final: f64, n: usize, x: f64, y: f64, singular: bool, a_max: f64, dt: f64) -> PyResult<Vec<(f64, i8, f64, f64)>> {
    let start = if singular { FrontStart::SingularSet { y } } else { FrontStart::Point { x, y } };
    let f = py
        .detach(|| geodesics::front_with(&frame.inner, start, t_final, n, &FrontOptions { a_max, dt }))
        .map_err(geodesic_err)?;
    Ok(f.points.iter().map(|p| (p.param, p.sign, p.x, p.y)).collect())
}

/// Lowest eigenvalues of the gauge-transformed operator over Fourier modes
/// `-k_max..=k_max`, as ascending `[(lambda, k, n), ...]`.
#[pyfunction]
#[pyo3(signature = (alpha=1.0, k_max=3, m_per_mode=4, n=4000, x_max=12.0))]
fn spectrum(py: Python<'_>, alpha: f64, k_max: u32, m_per_mode: usize, n: usize, x_max: f64) -> PyResult<Vec<(f64, i64, usize)>> {
    let entries = py.detach(|| spectral::spectrum_2d(alpha, k_max, m_per_mode, SpectrumGrid { n, x_max })).map_err(spectral_err)?;
    Ok(entries.into_iter().map(|e| (e.lambda, e.k, e.n)).collect())
}

/// Analytic verdict for `-d^2/dx^2 + c/x^2` near 0: dict with `c`,
/// `s_plus`, `s_minus`, `essentially_self_adjoint`, `deficiency_at_zero`.
#[pyfunction]
fn classify_self_adjoint<'py>(py: Python<'py>, c: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = spectral::classify_self_adjoint(c).map_err(spectral_err)?;
    let d = PyDict::new(py);
    d.set_item("c", r.c)?;
    d.set_item("s_plus", r.s_plus)?;
    d.set_item("s_minus", r.s_minus)?;
    d.set_item("essentially_self_adjoint", r.deficiency_at_zero == 0)?;
    d.set_item("deficiency_at_zero", r.deficiency_at_zero)?;
    Ok(d)
}

/// Numerical count of `L^2` solutions of `L* u = i u` near 0.
#[pyfunction]
#[pyo3(signature = (c, eps=1e-3, x_outer=10.0))]
fn deficiency_index(py: Python<'_>, c: f64, eps: f64, x_outer: f64) -> PyResult<u8> {
    py.detach(|| spectral::deficiency_index_numeric(c, eps, x_outer)).map(|d| d.count).map_err(spectral_err)
}

/// `c = (alpha/2)(alpha/2 + 1)`, the inverse-square coefficient of the
/// alpha-Grushin gauge transform.
#[pyfunction]
fn singular_coefficient(alpha: f64) -> f64 {
    spectral::singular_coefficient(alpha)
}

/// Fraction of heat mass past `x = 0` at `t_final` for each `eps`.
#[pyfunction]
#[pyo3(signature = (alpha, eps, t_final=0.5, n_x=400, n_y=64, dt=1e-3, margin=0.0))]
#[allow(clippy::too_many_arguments)]
fn transmitted_fractions(py: Python<'_>, alpha: f64, eps: Vec<f64>, t_final: f64, n_x: usize, n_y: usize, dt: f64, margin: f64) -> PyResult<Vec<f64>> {
    let opts = StudyOptions { n_x, n_y, dt, margin, ..Default::default() };
    py.detach(|| evolution::transmitted_fractions(alpha, &eps, t_final, &opts)).map_err(evolution_err)
}

/// Lowest `m` eigenvalues of the Martinet `(k, l)` mode operator.
#[pyfunction]
#[pyo3(signature = (k, l, n=2000, y_max=6.0, m=3))]
fn martinet_mode(py: Python<'_>, k: i64, l: i64, n: usize, y_max: f64, m: usize) -> PyResult<Vec<f64>> {
    py.detach(|| martinet::martinet_mode_solve(k, l, n, y_max, m)).map_err(spectral_err)
}

#[pyfunction]
fn popp_density(y: f64) -> PyResult<f64> {
    martinet::popp_density(y).map_err(frame_err)
}

#[pymodule]
fn ars(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrame>()?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(grushin_geodesic_origin, m)?)?;
    m.add_function(wrap_pyfunction!(front, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(classify_self_adjoint, m)?)?;
    m.add_function(wrap_pyfunction!(deficiency_index, m)?)?;
    m.add_function(wrap_pyfunction!(singular_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(transmitted_fractions, m)?)?;
    m.add_function(wrap_pyfunction!(martinet_mode, m)?)?;
    m.add_function(wrap_pyfunction!(popp_density, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
