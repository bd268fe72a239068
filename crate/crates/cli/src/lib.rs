//! Library side of the `ars` command: validate a [`RunConfig`], run one
//! subcommand, write CSV files and `manifest.json` into the output
//! directory.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use almost_riemannian::evolution::{self, Bump, SolverOptions, StudyOptions};
use almost_riemannian::geodesics::{self, CotangentState, FlowOptions, FrontOptions, FrontStart};
use almost_riemannian::martinet;
use almost_riemannian::spectral::{self, SpectrumGrid};
use almost_riemannian::{EvolutionError, FrameError, GeodesicError, Point, SpectralError};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use config::{Command, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for validation errors, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn frame_err(op: &str, e: FrameError) -> CliError {
    match e {
        FrameError::NotAdmissible { .. } => CliError::Numerical(format!("{op}: {e}")),
        _ => CliError::Validation(format!("{op}: {e}")),
    }
}

fn geodesic_err(op: &str, e: GeodesicError) -> CliError {
    match e {
        GeodesicError::StepSizeTooLarge { .. } => CliError::Numerical(format!("{op}: {e}")),
        GeodesicError::Frame(f) => frame_err(op, f),
        GeodesicError::InvalidParameter(_) => CliError::Validation(format!("{op}: {e}")),
    }
}

fn spectral_err(op: &str, e: SpectralError) -> CliError {
    match e {
        SpectralError::ConvergenceFailure { .. } | SpectralError::FitIllConditioned { .. } => CliError::Numerical(format!("{op}: {e}")),
        _ => CliError::Validation(format!("{op}: {e}")),
    }
}

fn evolution_err(op: &str, e: EvolutionError) -> CliError {
    match e {
        EvolutionError::SolverDiverged { .. } | EvolutionError::Inconclusive { .. } => CliError::Numerical(format!("{op}: {e}")),
        _ => CliError::Validation(format!("{op}: {e}")),
    }
}

/// Summary written to `manifest.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config: RunConfig,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
    pub results: Value,
    /// Set when the run failed after producing partial output.
    pub error: Option<String>,
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<(), CliError> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.write(name, &text)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        self.write(name, &text)
    }
}

enum Cell {
    F(f64),
    I(i64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:.16e}"),
            Cell::I(v) => v.to_string(),
        }
    }
}

use Cell::{F, I};

/// Runs `config.command`. On success returns the manifest already written
/// to disk. Numerical failures after partial output still write a manifest
/// with `error` set before returning the error.
pub fn run(config: &RunConfig) -> Result<Manifest, CliError> {
    let clock = Instant::now();
    let frame = config.frame.build()?;
    let mut out = Output::new(&config.output_dir)?;
    let outcome = match config.command {
        Command::Metric => run_metric(config, &frame, &mut out),
        Command::Geodesic => run_geodesic(config, &frame, &mut out),
        Command::Front => run_front(config, &frame, &mut out),
        Command::Spectrum => run_spectrum(config, &mut out),
        Command::Classify => run_classify(config, &mut out),
        Command::Evolve => run_evolve(config, &mut out),
        Command::Martinet => run_martinet(config, &mut out),
    };
    let (results, error) = match outcome {
        Ok(v) => (v, None),
        Err(e @ CliError::Validation(_)) if out.files.is_empty() => return Err(e),
        Err(e) => (Value::Null, Some(e)),
    };
    let manifest = Manifest {
        tool: "ars",
        version: env!("CARGO_PKG_VERSION"),
        command: config.command,
        config: config.clone(),
        wall_time_seconds: clock.elapsed().as_secs_f64(),
        files: out.files.clone(),
        results,
        error: error.as_ref().map(|e| e.to_string()),
    };
    out.json("manifest.json", &manifest)?;
    match error {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}

fn run_metric(config: &RunConfig, frame: &almost_riemannian::FrameSpec, out: &mut Output) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    for &[x, y] in &config.metric.points {
        let m = frame.metric_at(Point::new(x, y)).map_err(|e| frame_err("frame::metric_at", e))?;
        rows.push(vec![F(x), F(y), F(m.g11), F(m.g22), F(m.omega), F(m.curvature)]);
    }
    let n = rows.len();
    out.csv("metric.csv", &["x", "y", "g11", "g22", "omega", "curvature"], rows)?;
    Ok(json!({ "points": n }))
}

fn run_geodesic(config: &RunConfig, frame: &almost_riemannian::FrameSpec, out: &mut Output) -> Result<Value, CliError> {
    let g = &config.geodesic;
    let s0 = CotangentState::new(g.x, g.y, g.lambda1, g.lambda2);
    let opts = FlowOptions { tol_h: g.tol_h };
    let tr = geodesics::geodesic_flow_with(frame, s0, g.t, g.dt, &opts).map_err(|e| geodesic_err("geodesics::geodesic_flow", e))?;
    let mut rows = Vec::with_capacity(tr.states.len());
    for (i, s) in tr.states.iter().enumerate() {
        let h = geodesics::hamiltonian(frame, s).map_err(|e| frame_err("geodesics::hamiltonian", e))?;
        rows.push(vec![F(tr.time(i)), F(s.x), F(s.y), F(s.lambda1), F(s.lambda2), F(h)]);
    }
    out.csv("geodesic.csv", &["t", "x", "y", "lambda1", "lambda2", "H"], rows)?;
    let crossings = geodesics::crossing_report(&tr, frame).map_err(|e| frame_err("geodesics::crossing_report", e))?;
    out.csv(
        "crossings.csv",
        &["t", "direction", "vx", "vy"],
        tr.crossings.iter().zip(&crossings).map(|(c, v)| vec![F(c.t), I(c.direction.into()), F(v.vx), F(v.vy)]),
    )?;
    let end = tr.endpoint();
    Ok(json!({
        "endpoint": [end.x, end.y],
        "initial_energy": tr.initial_energy,
        "max_energy_drift": tr.max_energy_drift,
        "crossings": crossings.len(),
    }))
}

fn run_front(config: &RunConfig, frame: &almost_riemannian::FrameSpec, out: &mut Output) -> Result<Value, CliError> {
    let f = &config.front;
    let start = match f.start {
        config::FrontStartKind::Singular => FrontStart::SingularSet { y: f.y },
        config::FrontStartKind::Point => FrontStart::Point { x: f.x, y: f.y },
    };
    let opts = FrontOptions { a_max: f.a_max, dt: f.dt };
    let front = geodesics::front_with(frame, start, f.t, f.n, &opts).map_err(|e| geodesic_err("geodesics::front", e))?;
    out.csv("front.csv", &["param", "sign", "x", "y"], front.points.iter().map(|p| vec![F(p.param), I(p.sign.into()), F(p.x), F(p.y)]))?;
    let crossings = geodesics::front_self_intersections(&front);
    out.csv("front_intersections.csv", &["x", "y"], crossings.iter().map(|p| vec![F(p[0]), F(p[1])]))?;
    Ok(json!({ "points": front.points.len(), "provenance": front.provenance, "self_intersections": crossings.len() }))
}

fn run_spectrum(config: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let s = &config.spectrum;
    let entries = spectral::spectrum_2d(s.alpha, s.k_max, s.m_per_mode, SpectrumGrid { n: s.n, x_max: s.x_max })
        .map_err(|e| spectral_err("spectral::spectrum_2d", e))?;
    out.csv("spectrum.csv", &["k", "n", "lambda", "residual"], entries.iter().map(|e| vec![I(e.k), I(e.n as i64), F(e.lambda), F(e.residual)]))?;
    let classification = spectral::classify_alpha(s.alpha).map_err(|e| spectral_err("spectral::classify_alpha", e))?;
    Ok(json!({
        "eigenvalues": entries.len(),
        "lowest": entries.first().map(|e| e.lambda),
        "c": spectral::singular_coefficient(s.alpha),
        "verdict": classification.verdict,
    }))
}

fn run_classify(config: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let c_cfg = &config.classify;
    let report = match c_cfg.c {
        Some(c) => spectral::classify_self_adjoint(c),
        None => spectral::classify_alpha(c_cfg.alpha),
    }
    .map_err(|e| spectral_err("spectral::classify_self_adjoint", e))?;
    let numeric = spectral::deficiency_index_numeric(report.c, c_cfg.eps, c_cfg.x_outer)
        .map_err(|e| spectral_err("spectral::deficiency_index_numeric", e))?;
    let value = json!({ "report": report, "numeric": numeric, "agree": (numeric.count == 0) == (report.deficiency_at_zero == 0) });
    out.json("classify.json", &value)?;
    Ok(value)
}

fn study_options(e: &config::EvolveConfig) -> StudyOptions {
    StudyOptions {
        n_x: e.n_x,
        n_y: e.n_y,
        half_width: e.half_width,
        dt: e.dt,
        bump: Bump { center_x: e.bump_x, center_y: e.bump_y, width: e.bump_width },
        solver: SolverOptions { tol: e.solver_tol, ..Default::default() },
        record_every: e.record_every,
        margin: e.margin,
    }
}

fn series_rows(series: &[evolution::MassSample]) -> Vec<Vec<Cell>> {
    series.iter().map(|s| vec![F(s.t), F(s.mass_left), F(s.mass_right), F(s.norm)]).collect()
}

const SERIES_HEADER: [&str; 4] = ["t", "mass_left", "mass_right", "norm"];

fn run_evolve(config: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let e = &config.evolve;
    let opts = study_options(e);
    if e.eps.is_empty() {
        return Err(CliError::Validation("evolve: eps list is empty".into()));
    }
    match e.equation {
        config::Equation::Schrodinger => {
            let mut norms = Vec::new();
            for (i, &eps) in e.eps.iter().enumerate() {
                let series = evolution::schrodinger_run(e.alpha, eps, e.t, e.k0, &opts).map_err(|err| evolution_err("evolution::step_schrodinger", err))?;
                let n0 = series[0].norm;
                norms.push(series.iter().map(|s| ((s.norm - n0) / n0).abs()).fold(0.0, f64::max));
                out.csv(&format!("evolve_eps{i}.csv"), &SERIES_HEADER, series_rows(&series))?;
            }
            Ok(json!({ "equation": "schrodinger", "eps": e.eps, "max_relative_norm_drift": norms }))
        }
        config::Equation::Heat => {
            let runs = evolution::heat_sweep(e.alpha, &e.eps, e.t, &opts).map_err(|err| evolution_err("evolution::transmission_study", err))?;
            for (i, r) in runs.iter().enumerate() {
                out.csv(&format!("evolve_eps{i}.csv"), &SERIES_HEADER, series_rows(&r.series))?;
            }
            let transmitted: Vec<f64> = runs.iter().map(|r| r.transmitted(&opts)).collect();
            let verdict = evolution::classify_transmission(&transmitted);
            let mut summary = String::new();
            for (eps, f) in e.eps.iter().zip(&transmitted) {
                let _ = write!(summary, "{eps}:{f:.4e} ");
            }
            let report = json!({
                "alpha": e.alpha,
                "eps": e.eps,
                "t_final": e.t,
                "transmitted": transmitted,
                "verdict": verdict,
                "margin": e.margin,
                "barrier_threshold": evolution::BARRIER_THRESHOLD,
                "crossing_threshold": evolution::CROSSING_THRESHOLD,
                "thresholds_are_conventions": true,
            });
            out.json("transmission.json", &report)?;
            match verdict {
                Some(_) => Ok(report),
                None => Err(CliError::Numerical(format!("evolution::transmission_study: inconclusive, fractions {}", summary.trim_end()))),
            }
        }
    }
}

fn run_martinet(config: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let m = &config.martinet;
    if m.k_min > m.k_max || m.l_min > m.l_max {
        return Err(CliError::Validation("martinet: empty k or l range".into()));
    }
    let mut rows = Vec::new();
    let mut bound_holds = true;
    for k in m.k_min..=m.k_max {
        for l in m.l_min..=m.l_max {
            let mode = martinet::assemble_martinet_mode(k, l, m.n, m.y_max).map_err(|e| spectral_err("martinet::martinet_mode_solve", e))?;
            bound_holds &= mode.grid.nodes().zip(&mode.potential).all(|(y, v)| *v >= 0.75 / (y * y));
            let values = mode.matrix.lowest_eigenpairs(m.m).map_err(|e| spectral_err("martinet::martinet_mode_solve", e))?;
            for (n, p) in values.iter().enumerate() {
                rows.push(vec![I(k), I(l), I(n as i64), F(p.value)]);
            }
        }
    }
    let count = rows.len();
    out.csv("martinet.csv", &["k", "l", "n", "lambda"], rows)?;
    Ok(json!({ "eigenvalues": count, "potential_bound_holds": bound_holds }))
}
