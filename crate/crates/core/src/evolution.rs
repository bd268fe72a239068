//! Heat and Schrödinger evolution under the regularized degenerate form
//! `Q(u) = ∫ w (|u_x|^2 + |x|^(2 alpha) |u_y|^2) dx dy`, `w = max(|x|, eps)^(-alpha)`,
//! on `[-L, L] x T` with reflecting ends, and the transmission study across
//! `x = 0`.
//!
//! The form is realized by finite volumes on node-centred cells. Masses are
//! exact cell integrals of `w`; x-edges use the harmonic-mean conductance
//! `(∫ w^-1)^-1`, y-edges the cell integral of `|x|^(2 alpha) w`. Both time
//! steppers are Crank–Nicolson, solved by Jacobi-preconditioned CG (heat)
//! or COCG (Schrödinger). Reductions run sequentially, so results are
//! bitwise reproducible; independent runs of a sweep go in parallel.
//!
//! For `alpha < 1` the `eps -> 0` limit of this scheme picks one particular
//! extension of the operator. Which one is not asserted here.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::EvolutionError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedGrid {
    pub alpha: f64,
    pub eps: f64,
    /// Number of x-intervals (even, so a node sits at `x = 0`).
    pub n_x: usize,
    pub n_y: usize,
    pub half_width: f64,
    pub period: f64,
    pub h: f64,
    pub h_y: f64,
}

impl WeightedGrid {
    pub fn new(alpha: f64, eps: f64, n_x: usize, n_y: usize, half_width: f64) -> Result<Self, EvolutionError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(EvolutionError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(EvolutionError::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if n_x < 4 || !n_x.is_multiple_of(2) {
            return Err(EvolutionError::BadGrid(format!("n_x must be even and at least 4, got {n_x}")));
        }
        if n_y < 3 {
            return Err(EvolutionError::BadGrid(format!("n_y must be at least 3, got {n_y}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(EvolutionError::BadGrid(format!("half width must be positive, got {half_width}")));
        }
        let period = 2.0 * PI;
        Ok(Self { alpha, eps, n_x, n_y, half_width, period, h: 2.0 * half_width / n_x as f64, h_y: period / n_y as f64 })
    }

    pub fn nx_nodes(&self) -> usize {
        self.n_x + 1
    }

    pub fn len(&self) -> usize {
        self.nx_nodes() * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * self.n_x as f64) * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.h_y
    }

    /// Flat index, x-major.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_y + j
    }

    fn cell(&self, i: usize) -> (f64, f64) {
        let x = self.x(i);
        ((x - 0.5 * self.h).max(-self.half_width), (x + 0.5 * self.h).min(self.half_width))
    }
}

/// `∫_0^x max(|t|, eps)^p dt`.
fn floor_power_primitive(x: f64, eps: f64, p: f64) -> f64 {
    let a = x.abs();
    let v = if a <= eps {
        eps.powf(p) * a
    } else {
        let tail = if (p + 1.0).abs() < 1e-14 { eps.powf(p + 1.0) * (a / eps).ln() } else { (a.powf(p + 1.0) - eps.powf(p + 1.0)) / (p + 1.0) };
        eps.powf(p + 1.0) + tail
    };
    v.copysign(x)
}

/// `∫_0^x |t|^(2 alpha) max(|t|, eps)^(-alpha) dt`.
fn y_weight_primitive(x: f64, eps: f64, alpha: f64) -> f64 {
    let a = x.abs();
    let v = if a <= eps {
        a.powf(2.0 * alpha + 1.0) * eps.powf(-alpha) / (2.0 * alpha + 1.0)
    } else {
        eps.powf(alpha + 1.0) / (2.0 * alpha + 1.0) + (a.powf(alpha + 1.0) - eps.powf(alpha + 1.0)) / (alpha + 1.0)
    };
    v.copysign(x)
}

/// Weighted graph Laplacian on a [`WeightedGrid`]. Masses and conductances
/// depend on the x-index only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generator {
    pub grid: WeightedGrid,
    /// Cell masses `m_i` (including the `h_y` factor).
    pub mass: Vec<f64>,
    /// Conductance of the edge `(i, i+1)`.
    pub cond_x: Vec<f64>,
    /// Conductance of the edges `(i, j) - (i, j±1)`.
    pub cond_y: Vec<f64>,
}

pub fn assemble_generator(grid: WeightedGrid) -> Generator {
    let (alpha, eps) = (grid.alpha, grid.eps);
    let nx = grid.nx_nodes();
    let mut mass = Vec::with_capacity(nx);
    let mut cond_y = Vec::with_capacity(nx);
    for i in 0..nx {
        let (a, b) = grid.cell(i);
        mass.push(grid.h_y * (floor_power_primitive(b, eps, -alpha) - floor_power_primitive(a, eps, -alpha)));
        cond_y.push((y_weight_primitive(b, eps, alpha) - y_weight_primitive(a, eps, alpha)) / grid.h_y);
    }
    let cond_x = (0..nx - 1)
        .map(|i| {
            let r = floor_power_primitive(grid.x(i + 1), eps, alpha) - floor_power_primitive(grid.x(i), eps, alpha);
            grid.h_y / r
        })
        .collect();
    Generator { grid, mass, cond_x, cond_y }
}

impl Generator {
    /// `K u` with `(K u)_p = sum_q c_pq (u_q - u_p)`.
    fn apply_k<T>(&self, u: &[T], out: &mut [T])
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let g = &self.grid;
        let (nx, ny) = (g.nx_nodes(), g.n_y);
        for i in 0..nx {
            for j in 0..ny {
                let p = i * ny + j;
                let up = u[p];
                let jn = if j + 1 == ny { 0 } else { j + 1 };
                let js = if j == 0 { ny - 1 } else { j - 1 };
                let mut acc = (u[i * ny + jn] - up) * self.cond_y[i] + (u[i * ny + js] - up) * self.cond_y[i];
                if i + 1 < nx {
                    acc = acc + (u[p + ny] - up) * self.cond_x[i];
                }
                if i > 0 {
                    acc = acc + (u[p - ny] - up) * self.cond_x[i - 1];
                }
                out[p] = acc;
            }
        }
    }

    /// `A u = M^-1 K u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_k(u, &mut out);
        let ny = self.grid.n_y;
        out.iter_mut().enumerate().for_each(|(p, v)| *v /= self.mass[p / ny]);
        out
    }

    /// `-diag(K)` per x-index.
    fn degree(&self, i: usize) -> f64 {
        let nx = self.grid.nx_nodes();
        2.0 * self.cond_y[i] + if i + 1 < nx { self.cond_x[i] } else { 0.0 } + if i > 0 { self.cond_x[i - 1] } else { 0.0 }
    }

    fn mass_of(&self, p: usize) -> f64 {
        self.mass[p / self.grid.n_y]
    }

    /// `sum m_p u_p v_p`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).enumerate().map(|(p, (a, b))| self.mass_of(p) * a * b).sum()
    }

    pub fn total_mass(&self, u: &[f64]) -> f64 {
        u.iter().enumerate().map(|(p, a)| self.mass_of(p) * a).sum()
    }

    pub fn norm_sqr(&self, u: &[Complex64]) -> f64 {
        u.iter().enumerate().map(|(p, a)| self.mass_of(p) * a.norm_sqr()).sum()
    }

    /// m-mass carried by nodes with `x < 0`, `x = 0` and `x > 0`.
    pub fn mass_split(&self, u: &[f64]) -> [f64; 3] {
        let ny = self.grid.n_y;
        let mut s = [0.0; 3];
        for (p, a) in u.iter().enumerate() {
            let i = p / ny;
            let slot = (2 * i).cmp(&self.grid.n_x) as i32 + 1;
            s[slot as usize] += self.mass[i] * a;
        }
        s
    }

    pub fn field(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let g = &self.grid;
        (0..g.nx_nodes()).flat_map(|i| (0..g.n_y).map(move |j| (i, j))).map(|(i, j)| f(g.x(i), g.y(j))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 20_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionState<T> {
    pub t: f64,
    pub values: Vec<T>,
}

/// One Crank–Nicolson step of `u_t = A u`:
/// `(M - dt/2 K) u+ = (M + dt/2 K) u`.
pub fn step_heat(gen: &Generator, state: &EvolutionState<f64>, dt: f64, opts: &SolverOptions) -> Result<EvolutionState<f64>, EvolutionError> {
    if !(dt > 0.0) {
        return Err(EvolutionError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let n = state.values.len();
    let tau = 0.5 * dt;
    let mut ku = vec![0.0; n];
    gen.apply_k(&state.values, &mut ku);
    let b: Vec<f64> = (0..n).map(|p| gen.mass_of(p) * state.values[p] + tau * ku[p]).collect();
    let ny = gen.grid.n_y;
    let diag: Vec<f64> = (0..gen.grid.nx_nodes()).map(|i| gen.mass[i] + tau * gen.degree(i)).collect();
    let op = |x: &[f64], out: &mut [f64]| {
        gen.apply_k(x, out);
        for p in 0..n {
            out[p] = gen.mass_of(p) * x[p] - tau * out[p];
        }
    };
    let values = pcg(op, |p| diag[p / ny], &b, state.values.clone(), opts)?;
    Ok(EvolutionState { t: state.t + dt, values })
}

/// One Crank–Nicolson (Cayley) step of `i u_t + A u = 0`:
/// `(M - i dt/2 K) u+ = (M + i dt/2 K) u`.
pub fn step_schrodinger(gen: &Generator, state: &EvolutionState<Complex64>, dt: f64, opts: &SolverOptions) -> Result<EvolutionState<Complex64>, EvolutionError> {
    if !(dt > 0.0) {
        return Err(EvolutionError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let n = state.values.len();
    let tau = Complex64::new(0.0, 0.5 * dt);
    let mut ku = vec![Complex64::new(0.0, 0.0); n];
    gen.apply_k(&state.values, &mut ku);
    let b: Vec<Complex64> = (0..n).map(|p| state.values[p] * gen.mass_of(p) + tau * ku[p]).collect();
    let ny = gen.grid.n_y;
    let diag: Vec<Complex64> = (0..gen.grid.nx_nodes()).map(|i| gen.mass[i] + tau * gen.degree(i)).collect();
    let op = |x: &[Complex64], out: &mut [Complex64]| {
        gen.apply_k(x, out);
        for p in 0..n {
            out[p] = x[p] * gen.mass_of(p) - tau * out[p];
        }
    };
    let values = cocg(op, |p| diag[p / ny], &b, state.values.clone(), opts)?;
    Ok(EvolutionState { t: state.t + dt, values })
}

fn pcg(op: impl Fn(&[f64], &mut [f64]), diag: impl Fn(usize) -> f64, b: &[f64], mut x: Vec<f64>, opts: &SolverOptions) -> Result<Vec<f64>, EvolutionError> {
    let n = b.len();
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(p, q)| p * q).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut ax = vec![0.0; n];
    op(&x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|p| b[p] - ax[p]).collect();
    let mut z: Vec<f64> = (0..n).map(|p| r[p] / diag(p)).collect();
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for it in 0..opts.max_iterations {
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= opts.tol {
            return Ok(x);
        }
        if !res.is_finite() {
            return Err(EvolutionError::SolverDiverged { iterations: it, residual: res });
        }
        op(&d, &mut q);
        let step = rz / dot(&d, &q);
        for p in 0..n {
            x[p] += step * d[p];
            r[p] -= step * q[p];
            z[p] = r[p] / diag(p);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for p in 0..n {
            d[p] = z[p] + beta * d[p];
        }
    }
    let res = dot(&r, &r).sqrt() / bnorm;
    Err(EvolutionError::SolverDiverged { iterations: opts.max_iterations, residual: res })
}

/// Conjugate orthogonal CG for complex symmetric systems (bilinear, not
/// Hermitian, inner products).
fn cocg(
    op: impl Fn(&[Complex64], &mut [Complex64]),
    diag: impl Fn(usize) -> Complex64,
    b: &[Complex64],
    mut x: Vec<Complex64>,
    opts: &SolverOptions,
) -> Result<Vec<Complex64>, EvolutionError> {
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bilinear = |a: &[Complex64], c: &[Complex64]| a.iter().zip(c).fold(zero, |s, (p, q)| s + p * q);
    let norm = |a: &[Complex64]| a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![zero; n]);
    }
    let mut ax = vec![zero; n];
    op(&x, &mut ax);
    let mut r: Vec<Complex64> = (0..n).map(|p| b[p] - ax[p]).collect();
    let mut z: Vec<Complex64> = (0..n).map(|p| r[p] / diag(p)).collect();
    let mut d = z.clone();
    let mut rz = bilinear(&r, &z);
    let mut q = vec![zero; n];
    for it in 0..opts.max_iterations {
        let res = norm(&r) / bnorm;
        if res <= opts.tol {
            return Ok(x);
        }
        if !res.is_finite() {
            return Err(EvolutionError::SolverDiverged { iterations: it, residual: res });
        }
        op(&d, &mut q);
        let step = rz / bilinear(&d, &q);
        for p in 0..n {
            x[p] += step * d[p];
            r[p] -= step * q[p];
            z[p] = r[p] / diag(p);
        }
        let rz_new = bilinear(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for p in 0..n {
            d[p] = z[p] + beta * d[p];
        }
    }
    let res = norm(&r) / bnorm;
    Err(EvolutionError::SolverDiverged { iterations: opts.max_iterations, residual: res })
}

/// Gaussian initial datum, truncated below `1e-12` and on the far side of
/// `x = 0` (nodes within one cell of the singular line are cleared too).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub center_x: f64,
    pub center_y: f64,
    pub width: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Self { center_x: -1.0, center_y: PI, width: 0.3 }
    }
}

impl Bump {
    pub fn sample(&self, grid: &WeightedGrid) -> Vec<f64> {
        let side = self.center_x.signum();
        let period = grid.period;
        let (cx, cy, s2) = (self.center_x, self.center_y, 2.0 * self.width * self.width);
        let h = grid.h;
        let gen_field = |x: f64, y: f64| {
            if x * side <= h {
                return 0.0;
            }
            let mut dy = (y - cy).rem_euclid(period);
            if dy > 0.5 * period {
                dy -= period;
            }
            let v = (-((x - cx).powi(2) + dy * dy) / s2).exp();
            if v < 1e-12 {
                0.0
            } else {
                v
            }
        };
        (0..grid.nx_nodes()).flat_map(|i| (0..grid.n_y).map(move |j| (i, j))).map(|(i, j)| gen_field(grid.x(i), grid.y(j))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassSample {
    pub t: f64,
    pub mass_left: f64,
    pub mass_right: f64,
    /// Total m-mass for heat, m-weighted `L^2` norm for Schrödinger.
    pub norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyOptions {
    pub n_x: usize,
    pub n_y: usize,
    pub half_width: f64,
    pub dt: f64,
    pub bump: Bump,
    pub solver: SolverOptions,
    /// Keep every `record_every`-th step in the time series.
    pub record_every: usize,
    /// Only nodes with `|x| > margin` on the far side count as transmitted.
    /// Zero counts every node strictly past `x = 0`.
    pub margin: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self { n_x: 400, n_y: 64, half_width: 3.0, dt: 1e-3, bump: Bump::default(), solver: SolverOptions::default(), record_every: 10, margin: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatRun {
    pub generator: Generator,
    /// Mass on the node `x = 0` is split evenly between the sides.
    pub series: Vec<MassSample>,
    pub final_state: EvolutionState<f64>,
}

impl HeatRun {
    /// Share of the total m-mass at nodes with `x > margin` (`right`) or
    /// `x < -margin`.
    pub fn side_fraction(&self, right: bool, margin: f64) -> f64 {
        let g = &self.generator;
        let ny = g.grid.n_y;
        let u = &self.final_state.values;
        let side: f64 = u
            .iter()
            .enumerate()
            .filter(|(p, _)| {
                let x = g.grid.x(p / ny);
                if right { x > margin } else { x < -margin }
            })
            .map(|(p, v)| g.mass_of(p) * v)
            .sum();
        (side / g.total_mass(u)).clamp(0.0, 1.0)
    }

    /// Fraction on the side opposite the initial bump.
    pub fn transmitted(&self, opts: &StudyOptions) -> f64 {
        self.side_fraction(opts.bump.center_x < 0.0, opts.margin)
    }
}

/// Heat run from the bump to time `t_final`, recording left/right masses.
pub fn heat_run(alpha: f64, eps: f64, t_final: f64, opts: &StudyOptions) -> Result<HeatRun, EvolutionError> {
    let grid = WeightedGrid::new(alpha, eps, opts.n_x, opts.n_y, opts.half_width)?;
    let gen = assemble_generator(grid);
    let steps = step_count(t_final, opts.dt)?;
    let dt = t_final / steps as f64;
    let mut state = EvolutionState { t: 0.0, values: opts.bump.sample(&grid) };
    let record = |s: &EvolutionState<f64>| {
        let [l, z, r] = gen.mass_split(&s.values);
        MassSample { t: s.t, mass_left: l + 0.5 * z, mass_right: r + 0.5 * z, norm: l + z + r }
    };
    let mut series = vec![record(&state)];
    for k in 1..=steps {
        state = step_heat(&gen, &state, dt, &opts.solver)?;
        if k % opts.record_every.max(1) == 0 || k == steps {
            series.push(record(&state));
        }
    }
    Ok(HeatRun { generator: gen, series, final_state: state })
}

/// Schrödinger run from the bump (optionally boosted by `exp(i k0 x)`).
pub fn schrodinger_run(alpha: f64, eps: f64, t_final: f64, k0: f64, opts: &StudyOptions) -> Result<Vec<MassSample>, EvolutionError> {
    let grid = WeightedGrid::new(alpha, eps, opts.n_x, opts.n_y, opts.half_width)?;
    let gen = assemble_generator(grid);
    let steps = step_count(t_final, opts.dt)?;
    let dt = t_final / steps as f64;
    let u0 = opts.bump.sample(&grid);
    let ny = grid.n_y;
    let values = u0.iter().enumerate().map(|(p, &v)| Complex64::from_polar(v, k0 * grid.x(p / ny))).collect();
    let mut state = EvolutionState { t: 0.0, values };
    let record = |s: &EvolutionState<Complex64>| {
        let d: Vec<f64> = s.values.iter().map(|v| v.norm_sqr()).collect();
        let [l, z, r] = gen.mass_split(&d);
        MassSample { t: s.t, mass_left: l + 0.5 * z, mass_right: r + 0.5 * z, norm: (l + z + r).sqrt() }
    };
    let mut series = vec![record(&state)];
    for k in 1..=steps {
        state = step_schrodinger(&gen, &state, dt, &opts.solver)?;
        if k % opts.record_every.max(1) == 0 || k == steps {
            series.push(record(&state));
        }
    }
    Ok(series)
}

fn step_count(t_final: f64, dt: f64) -> Result<usize, EvolutionError> {
    if !(t_final > 0.0 && dt > 0.0) {
        return Err(EvolutionError::InvalidParameter(format!("need T > 0 and dt > 0, got T = {t_final}, dt = {dt}")));
    }
    Ok(((t_final / dt).round() as usize).max(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransmissionVerdict {
    BarrierConsistent,
    CrossingConsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransmissionReport {
    pub alpha: f64,
    pub eps: Vec<f64>,
    pub t_final: f64,
    /// Fraction of the m-mass on the far side of `x = 0` at `t_final`.
    pub transmitted: Vec<f64>,
    pub verdict: TransmissionVerdict,
    pub margin: f64,
    /// Decision thresholds; conventions of this tool, not derived values.
    pub barrier_threshold: f64,
    pub crossing_threshold: f64,
}

pub const BARRIER_THRESHOLD: f64 = 1e-3;
pub const CROSSING_THRESHOLD: f64 = 1e-2;

/// Transmitted fraction for each `eps` (in the order given, expected
/// decreasing) and the verdict:
/// * barrier-consistent: the fractions decrease strictly and end below
///   [`BARRIER_THRESHOLD`];
/// * crossing-consistent: the last two agree within 10% and the last is
///   above [`CROSSING_THRESHOLD`].
///
/// Anything else is [`EvolutionError::Inconclusive`] carrying the fractions.
pub fn transmission_study(alpha: f64, eps_list: &[f64], t_final: f64, opts: &StudyOptions) -> Result<TransmissionReport, EvolutionError> {
    let transmitted = transmitted_fractions(alpha, eps_list, t_final, opts)?;
    let verdict = classify_transmission(&transmitted).ok_or_else(|| EvolutionError::Inconclusive { fractions: transmitted.clone() })?;
    Ok(TransmissionReport {
        alpha,
        eps: eps_list.to_vec(),
        t_final,
        transmitted,
        verdict,
        margin: opts.margin,
        barrier_threshold: BARRIER_THRESHOLD,
        crossing_threshold: CROSSING_THRESHOLD,
    })
}

pub fn transmitted_fractions(alpha: f64, eps_list: &[f64], t_final: f64, opts: &StudyOptions) -> Result<Vec<f64>, EvolutionError> {
    let runs = heat_sweep(alpha, eps_list, t_final, opts)?;
    Ok(runs.iter().map(|r| r.transmitted(opts)).collect())
}

/// Independent heat runs for each `eps`, in parallel, returned in input order.
pub fn heat_sweep(alpha: f64, eps_list: &[f64], t_final: f64, opts: &StudyOptions) -> Result<Vec<HeatRun>, EvolutionError> {
    if eps_list.len() < 2 {
        return Err(EvolutionError::InvalidParameter("need at least two eps values".into()));
    }
    let grid = WeightedGrid::new(alpha, eps_list[0], opts.n_x, opts.n_y, opts.half_width)?;
    if opts.bump.center_x.abs() - 3.0 * opts.bump.width <= grid.h {
        return Err(EvolutionError::InvalidParameter("bump must sit clearly on one side of x = 0".into()));
    }
    eps_list.par_iter().map(|&eps| heat_run(alpha, eps, t_final, opts)).collect()
}

pub fn classify_transmission(fractions: &[f64]) -> Option<TransmissionVerdict> {
    let n = fractions.len();
    if n < 2 {
        return None;
    }
    let last = fractions[n - 1];
    let decreasing = fractions.windows(2).all(|w| w[1] < w[0]);
    if decreasing && last < BARRIER_THRESHOLD {
        return Some(TransmissionVerdict::BarrierConsistent);
    }
    let prev = fractions[n - 2];
    if last > CROSSING_THRESHOLD && (last / prev - 1.0).abs() <= 0.1 {
        return Some(TransmissionVerdict::CrossingConsistent);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    fn small(alpha: f64, eps: f64) -> Generator {
        assemble_generator(WeightedGrid::new(alpha, eps, 40, 12, 3.0).unwrap())
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn primitives_match_quadrature() {
        for (alpha, eps) in [(1.0, 0.05), (0.5, 0.1), (1.5, 0.0125)] {
            for (a, b) in [(-0.3, 0.2), (0.01, 0.7), (-2.0, -0.04)] {
                let w = quadrature::adaptive(&|x: f64| x.abs().max(eps).powf(-alpha), a, b, 1e-14);
                let got = floor_power_primitive(b, eps, -alpha) - floor_power_primitive(a, eps, -alpha);
                assert!((got - w).abs() < 1e-10 * w.abs().max(1.0));
                let wy = quadrature::adaptive(&|x: f64| x.abs().powf(2.0 * alpha) * x.abs().max(eps).powf(-alpha), a, b, 1e-14);
                let got = y_weight_primitive(b, eps, alpha) - y_weight_primitive(a, eps, alpha);
                assert!((got - wy).abs() < 1e-10 * wy.abs().max(1.0));
            }
        }
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let g = small(1.0, 0.05);
        let u = vec![3.7; g.grid.len()];
        assert!(g.apply(&u).iter().all(|v| v.abs() < 1e-10));
        assert!(g.mass.iter().chain(&g.cond_x).chain(&g.cond_y).all(|v| *v > 0.0 && v.is_finite()));
    }

    #[test]
    fn generator_is_symmetric_and_negative() {
        for (alpha, eps) in [(1.0, 0.05), (0.25, 0.01), (1.5, 0.2)] {
            let g = small(alpha, eps);
            let u = pseudo_random(g.grid.len(), 1);
            let v = pseudo_random(g.grid.len(), 2);
            let auv = g.inner(&g.apply(&u), &v);
            let uav = g.inner(&u, &g.apply(&v));
            assert!((auv - uav).abs() < 1e-12 * auv.abs().max(1.0));
            assert!(g.inner(&g.apply(&u), &u) < 0.0);
        }
    }

    #[test]
    fn wide_floor_gives_uniform_x_weights() {
        let g = small(1.3, 3.0);
        let h = g.grid.h;
        let w = 3f64.powf(-1.3);
        for i in 1..g.grid.n_x {
            assert!((g.mass[i] - w * h * g.grid.h_y).abs() < 1e-14);
        }
        for c in &g.cond_x {
            assert!((c / (w * g.grid.h_y / h) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn masses_near_zero_grow_only_for_alpha_at_least_one() {
        let region = |alpha: f64, eps: f64| {
            let g = assemble_generator(WeightedGrid::new(alpha, eps, 400, 4, 3.0).unwrap());
            (0..g.grid.nx_nodes()).filter(|&i| g.grid.x(i).abs() < 0.5).map(|i| g.mass[i]).sum::<f64>()
        };
        assert!(region(1.0, 1e-4) > region(1.0, 1e-2) + 0.5);
        assert!((region(0.5, 1e-4) - region(0.5, 1e-3)).abs() < 0.1);
    }

    #[test]
    fn heat_keeps_constants_and_mass() {
        let g = small(1.0, 0.05);
        let opts = SolverOptions::default();
        let c = EvolutionState { t: 0.0, values: vec![2.0; g.grid.len()] };
        let next = step_heat(&g, &c, 0.01, &opts).unwrap();
        assert!(next.values.iter().all(|v| (v - 2.0).abs() < 1e-12));

        let mut s = EvolutionState { t: 0.0, values: pseudo_random(g.grid.len(), 9).iter().map(|v| v + 1.0).collect() };
        let mean = g.total_mass(&s.values) / g.total_mass(&vec![1.0; s.values.len()]);
        let dev = |u: &[f64]| {
            let d: Vec<f64> = u.iter().map(|v| v - mean).collect();
            g.inner(&d, &d)
        };
        let m0 = g.total_mass(&s.values);
        let mut prev = dev(&s.values);
        for _ in 0..20 {
            let m = g.total_mass(&s.values);
            s = step_heat(&g, &s, 0.005, &opts).unwrap();
            assert!(((g.total_mass(&s.values) - m) / m).abs() <= 1e-9);
            let d = dev(&s.values);
            assert!(d < prev);
            prev = d;
        }
        assert!((s.t - 0.1).abs() < 1e-12);
        assert!(((g.total_mass(&s.values) - m0) / m0).abs() < 1e-9);
    }

    #[test]
    fn schrodinger_preserves_norm_and_zero() {
        let g = small(0.5, 0.05);
        let opts = SolverOptions { tol: 1e-13, ..Default::default() };
        let z = EvolutionState { t: 0.0, values: vec![Complex64::new(0.0, 0.0); g.grid.len()] };
        assert!(step_schrodinger(&g, &z, 0.01, &opts).unwrap().values.iter().all(|v| v.norm() == 0.0));
        let re = pseudo_random(g.grid.len(), 3);
        let im = pseudo_random(g.grid.len(), 4);
        let mut s = EvolutionState { t: 0.0, values: re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect() };
        for _ in 0..50 {
            let n0 = g.norm_sqr(&s.values).sqrt();
            s = step_schrodinger(&g, &s, 0.01, &opts).unwrap();
            assert!(((g.norm_sqr(&s.values).sqrt() - n0) / n0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_packet_moves_ballistically() {
        // uniform weight, y-independent packet: i u_t + u_xx = 0, group velocity 2 k0
        let grid = WeightedGrid::new(1.0, 10.0, 800, 3, 4.0).unwrap();
        let g = assemble_generator(grid);
        let (k0, sigma) = (3.0, 0.4);
        let values: Vec<Complex64> = (0..grid.nx_nodes())
            .flat_map(|i| {
                let x = grid.x(i);
                let v = Complex64::from_polar((-(x + 1.5).powi(2) / (2.0 * sigma * sigma)).exp(), k0 * x);
                std::iter::repeat_n(v, grid.n_y)
            })
            .collect();
        let centroid = |u: &[Complex64]| {
            let w: Vec<f64> = u.iter().map(|v| v.norm_sqr()).collect();
            let xw: Vec<f64> = w.iter().enumerate().map(|(p, a)| a * grid.x(p / grid.n_y)).collect();
            g.total_mass(&xw) / g.total_mass(&w)
        };
        let mut s = EvolutionState { t: 0.0, values };
        let opts = SolverOptions { tol: 1e-12, ..Default::default() };
        let x0 = centroid(&s.values);
        for _ in 0..100 {
            s = step_schrodinger(&g, &s, 0.004, &opts).unwrap();
        }
        let v = (centroid(&s.values) - x0) / s.t;
        assert!((v - 2.0 * k0).abs() < 0.02 * 2.0 * k0, "velocity {v}");
    }

    #[test]
    fn mirrored_bump_mirrors_masses() {
        let opts = StudyOptions { n_x: 60, n_y: 8, dt: 5e-3, ..Default::default() };
        let left = heat_run(1.0, 0.05, 0.1, &opts).unwrap();
        let mirrored = StudyOptions { bump: Bump { center_x: 1.0, ..Bump::default() }, ..opts };
        let right = heat_run(1.0, 0.05, 0.1, &mirrored).unwrap();
        for margin in [0.0, 0.3] {
            assert!((left.side_fraction(true, margin) - right.side_fraction(false, margin)).abs() <= 1e-12);
        }
        for (a, b) in left.series.iter().zip(&right.series) {
            assert!((a.mass_left - b.mass_right).abs() <= 1e-12 * a.norm);
            assert!((a.mass_right - b.mass_left).abs() <= 1e-12 * a.norm);
        }
    }

    #[test]
    fn grid_doubling_is_stable_away_from_the_singular_line() {
        for alpha in [0.5, 1.0] {
            let frac = |n_x: usize| {
                let opts = StudyOptions { n_x, n_y: 8, dt: 2.5e-3, margin: 0.1, ..Default::default() };
                heat_run(alpha, 0.05, 0.25, &opts).unwrap().side_fraction(true, 0.1)
            };
            let (coarse, fine) = (frac(200), frac(400));
            assert!(coarse > 1e-3);
            assert!(((fine - coarse) / fine).abs() < 0.05, "alpha {alpha}: {coarse} vs {fine}");
        }
    }

    #[test]
    fn verdict_rules() {
        use TransmissionVerdict::*;
        assert_eq!(classify_transmission(&[0.1, 0.01, 1e-3, 1e-4]), Some(BarrierConsistent));
        assert_eq!(classify_transmission(&[0.1, 0.12, 0.125, 0.126]), Some(CrossingConsistent));
        assert_eq!(classify_transmission(&[0.1, 0.05, 0.01, 0.005]), None);
        assert_eq!(classify_transmission(&[0.1]), None);
    }

    #[test]
    fn bump_clears_the_far_side() {
        let grid = WeightedGrid::new(1.0, 0.1, 400, 16, 3.0).unwrap();
        let u = Bump::default().sample(&grid);
        for i in 0..grid.nx_nodes() {
            if grid.x(i) >= -grid.h {
                assert!((0..grid.n_y).all(|j| u[grid.index(i, j)] == 0.0));
            }
        }
        assert!(u.iter().all(|v| *v >= 0.0));
    }
}
