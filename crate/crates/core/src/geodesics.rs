//! Geodesic Hamiltonian flow, Grushin closed forms and fronts.
//!
//! Arclength geodesics are projections of solutions of Hamilton's equations
//! for `H = (lambda1^2 + f^2 lambda2^2) / 2` on the level set `H = 1/2`. The
//! vector field is smooth across the singular set, so a fixed-step RK4
//! integrator carries trajectories through `x = 0` without special handling.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::frame::{FrameKind, FrameSpec, Point};
use crate::{FrameError, GeodesicError};

/// Phase point `(x, y, lambda1, lambda2)`. `y` is kept unwrapped along
/// trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CotangentState {
    pub x: f64,
    pub y: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl CotangentState {
    pub const fn new(x: f64, y: f64, lambda1: f64, lambda2: f64) -> Self {
        Self { x, y, lambda1, lambda2 }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }

    fn axpy(&self, h: f64, d: [f64; 4]) -> Self {
        Self::new(self.x + h * d[0], self.y + h * d[1], self.lambda1 + h * d[2], self.lambda2 + h * d[3])
    }
}

pub fn hamiltonian(frame: &FrameSpec, s: &CotangentState) -> Result<f64, FrameError> {
    let f = frame.f(s.point())?;
    Ok(0.5 * (s.lambda1 * s.lambda1 + f * f * s.lambda2 * s.lambda2))
}

/// `(dx, dy, dlambda1, dlambda2)` from Hamilton's equations.
fn hamilton_rhs(frame: &FrameSpec, s: &CotangentState) -> Result<[f64; 4], FrameError> {
    let p = s.point();
    let l22 = s.lambda2 * s.lambda2;
    match frame.kind {
        FrameKind::AlphaGrushin { .. } => {
            let f = frame.f(p)?;
            let ffx = frame.f_fx(p)?;
            Ok([s.lambda1, f * f * s.lambda2, -ffx * l22, 0.0])
        }
        _ => {
            let j = frame.jet(p)?;
            Ok([s.lambda1, j.f * j.f * s.lambda2, -j.f * j.fx * l22, -j.f * j.fy * l22])
        }
    }
}

fn rk4_step(frame: &FrameSpec, s: &CotangentState, h: f64) -> Result<CotangentState, FrameError> {
    let k1 = hamilton_rhs(frame, s)?;
    let k2 = hamilton_rhs(frame, &s.axpy(0.5 * h, k1))?;
    let k3 = hamilton_rhs(frame, &s.axpy(0.5 * h, k2))?;
    let k4 = hamilton_rhs(frame, &s.axpy(h, k3))?;
    let mut d = [0.0; 4];
    for i in 0..4 {
        d[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    Ok(s.axpy(h, d))
}

/// A sign change of `x` along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub t: f64,
    /// +1 when crossing from `x < 0` to `x > 0`, -1 otherwise.
    pub direction: i8,
    pub state: CotangentState,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    /// Uniform step; `t_i = i * dt`.
    pub dt: f64,
    pub states: Vec<CotangentState>,
    pub crossings: Vec<Crossing>,
    pub initial_energy: f64,
    pub max_energy_drift: f64,
}

impl Trajectory {
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn endpoint(&self) -> CotangentState {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    /// Energy tolerance; the flow fails when the drift exceeds `100 * tol_h`.
    pub tol_h: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol_h: 1e-8 }
    }
}

/// Integrates the geodesic flow from `s0` up to `t_final` with classical RK4.
/// The step is adjusted down so that a whole number of steps ends at
/// `t_final`.
pub fn geodesic_flow(frame: &FrameSpec, s0: CotangentState, t_final: f64, dt: f64) -> Result<Trajectory, GeodesicError> {
    geodesic_flow_with(frame, s0, t_final, dt, &FlowOptions::default())
}

pub fn geodesic_flow_with(
    frame: &FrameSpec,
    s0: CotangentState,
    t_final: f64,
    dt: f64,
    opts: &FlowOptions,
) -> Result<Trajectory, GeodesicError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(GeodesicError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(GeodesicError::InvalidParameter(format!("final time must be non-negative, got {t_final}")));
    }
    let h0 = hamiltonian(frame, &s0)?;
    if !(h0 > 0.0) {
        return Err(GeodesicError::InvalidParameter("initial covector has zero energy".into()));
    }
    let ratio = t_final / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) { ratio.round() } else { ratio.ceil() } as usize;
    let h = if steps == 0 { dt } else { t_final / steps as f64 };

    let mut states = Vec::with_capacity(steps + 1);
    states.push(s0);
    let mut crossings = Vec::new();
    let mut max_drift: f64 = 0.0;
    let mut last_side: Option<(i8, usize)> = side(s0.x).map(|sd| (sd, 0));
    let mut s = s0;
    for i in 0..steps {
        s = rk4_step(frame, &s, h)?;
        states.push(s);
        max_drift = max_drift.max((hamiltonian(frame, &s)? - h0).abs());
        if let Some(sd) = side(s.x) {
            match last_side {
                Some((prev, at)) if prev != sd => {
                    crossings.push(locate_crossing(frame, &states[at], at as f64 * h, (i + 1 - at) as f64 * h, sd)?);
                }
                _ => {}
            }
            last_side = Some((sd, i + 1));
        }
    }
    let limit = 100.0 * opts.tol_h;
    if max_drift > limit {
        return Err(GeodesicError::StepSizeTooLarge { drift: max_drift, limit, dt: h });
    }
    Ok(Trajectory { dt: h, states, crossings, initial_energy: h0, max_energy_drift: max_drift })
}

fn side(x: f64) -> Option<i8> {
    if x > 0.0 {
        Some(1)
    } else if x < 0.0 {
        Some(-1)
    } else {
        None
    }
}

/// Linear interpolation in the bracket, then one Newton correction on `x(t)`
/// using `dx/dt = lambda1` evaluated on an RK4 substep.
fn locate_crossing(frame: &FrameSpec, start: &CotangentState, t_start: f64, span: f64, new_side: i8) -> Result<Crossing, FrameError> {
    let end = rk4_step(frame, start, span)?;
    let mut tau = span * start.x / (start.x - end.x);
    let probe = rk4_step(frame, start, tau)?;
    if probe.lambda1 != 0.0 {
        tau = (tau - probe.x / probe.lambda1).clamp(0.0, span);
    }
    let state = rk4_step(frame, start, tau)?;
    Ok(Crossing { t: t_start + tau, direction: new_side, state })
}

/// Velocity of a geodesic at a singular-set crossing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingVelocity {
    pub t: f64,
    pub vx: f64,
    pub vy: f64,
}

/// Velocity `(lambda1, f^2 lambda2)` at every crossing of `traj`.
pub fn crossing_report(traj: &Trajectory, frame: &FrameSpec) -> Result<Vec<CrossingVelocity>, FrameError> {
    traj.crossings
        .iter()
        .map(|c| {
            let f = frame.f(c.state.point())?;
            Ok(CrossingVelocity { t: c.t, vx: c.state.lambda1, vy: f * f * c.state.lambda2 })
        })
        .collect()
}

/// `sin(u) / u`, continuous at 0.
fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// `(u - sin u) / u^2`, odd and continuous at 0.
fn excess(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        let u2 = u * u;
        u * (1.0 / 6.0 - u2 / 120.0 + u2 * u2 / 5040.0 - u2 * u2 * u2 / 362_880.0)
    } else {
        (u - u.sin()) / (u * u)
    }
}

/// Grushin arclength geodesic from the origin with `lambda1 = sign`,
/// `lambda2 = a`: `x = sign sin(at)/a`, `y = (2at - sin 2at)/(4a^2)`, written in
/// a form that is uniform as `a -> 0`.
pub fn grushin_geodesic_origin(a: f64, sign: f64, t: f64) -> Point {
    let sign = if sign < 0.0 { -1.0 } else { 1.0 };
    Point::new(sign * t * sinc(a * t), t * t * excess(2.0 * a * t))
}

/// Grushin arclength geodesic from `(-1, 0)` with `lambda1 = cos(theta)`,
/// `lambda2 = sin(theta)`.
///
/// The textbook expressions divide by `sin(theta)`; expanding
/// `sin(theta - t sin(theta))` gives the equivalent forms
/// `x = cos(theta) t sinc(ts) - cos(ts)` and
/// `y = t^2 e(2ts) + s t sinc(2ts) - cos(theta) t sin(ts) sinc(ts)` with
/// `s = sin(theta)`, `e(u) = (u - sin u)/u^2`, which stay accurate at
/// `theta = 0, pi`.
pub fn grushin_geodesic_riemannian(theta: f64, t: f64) -> Point {
    let (s, c) = theta.sin_cos();
    let ts = t * s;
    let x = c * t * sinc(ts) - ts.cos();
    let y = t * t * excess(2.0 * ts) + s * t * sinc(2.0 * ts) - c * t * ts.sin() * sinc(ts);
    Point::new(x, y)
}

/// Closed-form Grushin geodesic for an arbitrary initial state with
/// positive energy, using the dilation `(x, y) -> (r x, r^2 y)`, the
/// reflection `x -> -x` and `y`-translations. Time is rescaled when the
/// state is not on `H = 1/2`.
pub fn grushin_closed_form(s0: &CotangentState, t: f64) -> Point {
    let energy = 0.5 * (s0.lambda1 * s0.lambda1 + s0.x * s0.x * s0.lambda2 * s0.lambda2);
    let speed = (2.0 * energy).sqrt();
    let (l1, l2) = (s0.lambda1 / speed, s0.lambda2 / speed);
    let tau = speed * t;
    if s0.x == 0.0 {
        let p = grushin_geodesic_origin(l2, l1, tau);
        return Point::new(p.x, s0.y + p.y);
    }
    let r = s0.x.abs();
    if s0.x < 0.0 {
        let theta = (l2 * r).atan2(l1);
        let p = grushin_geodesic_riemannian(theta, tau / r);
        Point::new(r * p.x, s0.y + r * r * p.y)
    } else {
        let theta = (l2 * r).atan2(-l1);
        let p = grushin_geodesic_riemannian(theta, tau / r);
        Point::new(-r * p.x, s0.y + r * r * p.y)
    }
}

/// Where a front is launched from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FrontStart {
    /// Any point; if it lies on the singular set the singular sweep is used.
    Point { x: f64, y: f64 },
    /// The singular-set point `(0, y)`, with covectors transversal to it.
    SingularSet { y: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Integrated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrontPoint {
    /// `a = lambda2` for singular starts, `theta` for Riemannian starts.
    pub param: f64,
    /// Sign of `lambda1` for singular starts, 0 for Riemannian starts.
    pub sign: i8,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Front {
    pub time: f64,
    pub points: Vec<FrontPoint>,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontOptions {
    /// Half-width of the `a` grid for singular starts.
    pub a_max: f64,
    /// Step used when the flow has to be integrated.
    pub dt: f64,
}

impl Default for FrontOptions {
    fn default() -> Self {
        Self { a_max: 15.0, dt: 1e-4 }
    }
}

pub fn front(frame: &FrameSpec, start: FrontStart, t_final: f64, n: usize) -> Result<Front, GeodesicError> {
    front_with(frame, start, t_final, n, &FrontOptions::default())
}

/// Endpoints at time `t_final` of the arclength geodesics leaving `start`.
///
/// From a Riemannian point, `theta` runs over `n` uniform samples of
/// `[0, 2 pi)` with covector `(cos theta, sin theta / |f|)`. From the
/// singular set, `a` runs over `n` uniform samples of `[-a_max, a_max]`
/// (plus `a = 0` when the grid misses it) for both `lambda1 = +1` and
/// `lambda1 = -1`.
pub fn front_with(
    frame: &FrameSpec,
    start: FrontStart,
    t_final: f64,
    n: usize,
    opts: &FrontOptions,
) -> Result<Front, GeodesicError> {
    if n < 8 {
        return Err(GeodesicError::InvalidParameter(format!("front needs n >= 8, got {n}")));
    }
    if !(t_final >= 0.0) {
        return Err(GeodesicError::InvalidParameter(format!("final time must be non-negative, got {t_final}")));
    }
    let origin = match start {
        FrontStart::Point { x, y } => Point::new(x, y),
        FrontStart::SingularSet { y } => Point::new(0.0, y),
    };
    let f0 = frame.f(origin)?;
    let mut seeds: Vec<(f64, i8, CotangentState)> = Vec::new();
    if f0 == 0.0 {
        let mut grid: Vec<f64> = (0..n).map(|j| -opts.a_max + 2.0 * opts.a_max * j as f64 / (n - 1) as f64).collect();
        if !grid.contains(&0.0) {
            grid.push(0.0);
            grid.sort_by(f64::total_cmp);
        }
        for sign in [1i8, -1] {
            for &a in &grid {
                seeds.push((a, sign, CotangentState::new(origin.x, origin.y, sign as f64, a)));
            }
        }
    } else {
        for j in 0..n {
            let theta = 2.0 * PI * j as f64 / n as f64;
            let (s, c) = theta.sin_cos();
            seeds.push((theta, 0, CotangentState::new(origin.x, origin.y, c, s / f0.abs())));
        }
    }
    let closed = frame.is_exact_grushin();
    let points = seeds
        .par_iter()
        .map(|&(param, sign, s0)| {
            let end = if closed || t_final == 0.0 {
                if t_final == 0.0 { s0.point() } else { grushin_closed_form(&s0, t_final) }
            } else {
                geodesic_flow(frame, s0, t_final, opts.dt)?.endpoint().point()
            };
            Ok(FrontPoint { param, sign, x: end.x, y: end.y })
        })
        .collect::<Result<Vec<_>, GeodesicError>>()?;
    let provenance = if closed { Provenance::ClosedForm } else { Provenance::Integrated };
    Ok(Front { time: t_final, points, provenance })
}

/// Transversal self-intersections of the front, reading each family (fixed
/// `sign`) as a polyline in parameter order; the `theta` sweep is closed.
pub fn front_self_intersections(front: &Front) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for sign in [-1i8, 0, 1] {
        let pts: Vec<[f64; 2]> = front.points.iter().filter(|p| p.sign == sign).map(|p| [p.x, p.y]).collect();
        if pts.len() < 4 {
            continue;
        }
        let closed = sign == 0;
        let m = if closed { pts.len() } else { pts.len() - 1 };
        let seg = |i: usize| (pts[i], pts[(i + 1) % pts.len()]);
        for i in 0..m {
            for j in (i + 2)..m {
                if closed && i == 0 && j == m - 1 {
                    continue;
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if let Some(p) = segment_intersection(a, b, c, d) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn segment_intersection(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<[f64; 2]> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return None;
    }
    let qp = [c[0] - a[0], c[1] - a[1]];
    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
        Some([a[0] + t * r[0], a[1] + t * r[1]])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Domain, PhiPreset};
    use approx::assert_relative_eq;

    fn grushin() -> FrameSpec {
        FrameSpec::grushin().with_domain(Domain::Plane)
    }

    #[test]
    fn hamiltonian_examples() {
        let g = grushin();
        assert_eq!(hamiltonian(&g, &CotangentState::new(0.0, 0.0, 1.0, 3.7)).unwrap(), 0.5);
        let th: f64 = 0.9;
        let h = hamiltonian(&g, &CotangentState::new(-1.0, 0.0, th.cos(), th.sin())).unwrap();
        assert_relative_eq!(h, 0.5, max_relative = 1e-15);
        assert_eq!(hamiltonian(&g, &CotangentState::new(0.4, 1.0, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn flow_along_the_axis() {
        let tr = geodesic_flow(&grushin(), CotangentState::new(0.0, 0.0, 1.0, 0.0), 1.0, 1e-3).unwrap();
        let e = tr.endpoint();
        assert_relative_eq!(e.x, 1.0, max_relative = 1e-14);
        assert_eq!(e.y, 0.0);
        assert!(tr.crossings.is_empty());
    }

    #[test]
    fn flow_matches_origin_closed_form() {
        let tr = geodesic_flow(&grushin(), CotangentState::new(0.0, 0.0, 1.0, 1.0), 1.0, 1e-3).unwrap();
        let e = tr.endpoint();
        assert!((e.x - 1f64.sin()).abs() < 1e-10);
        assert!((e.y - (2.0 - 2f64.sin()) / 4.0).abs() < 1e-10);
    }

    #[test]
    fn lambda2_is_conserved_exactly() {
        let tr = geodesic_flow(&grushin(), CotangentState::new(-1.0, 0.0, 0.0, 1.0), 3.0, 1e-3).unwrap();
        assert!(tr.states.iter().all(|s| s.lambda2 == 1.0));
    }

    #[test]
    fn closed_forms_at_table_values() {
        assert_eq!(grushin_geodesic_origin(0.0, 1.0, 2.0), Point::new(2.0, 0.0));
        assert_eq!(grushin_geodesic_origin(0.0, -1.0, 2.0), Point::new(-2.0, 0.0));
        let p = grushin_geodesic_origin(PI, 1.0, 1.0);
        assert!(p.x.abs() < 1e-15);
        assert_relative_eq!(p.y, 1.0 / (2.0 * PI), max_relative = 1e-14);
        let q = grushin_geodesic_riemannian(0.0, 3.0);
        assert_eq!(q, Point::new(2.0, 0.0));
        let q = grushin_geodesic_riemannian(PI, 3.0);
        assert!((q.x + 4.0).abs() < 1e-14 && q.y.abs() < 1e-14);
        let q = grushin_geodesic_riemannian(PI / 2.0, PI / 2.0);
        assert!(q.x.abs() < 1e-15);
        for th in [0.0, 0.3, 2.0, 4.0] {
            let q = grushin_geodesic_riemannian(th, 0.0);
            assert!((q.x + 1.0).abs() < 1e-15 && q.y.abs() < 1e-15);
        }
    }

    #[test]
    fn small_a_limit_is_continuous() {
        for t in [0.1, 1.0, 3.0] {
            // y = a t^3 / 3 + O(a^3)
            let a = 1e-6;
            let p = grushin_geodesic_origin(a, 1.0, t);
            assert!((p.x - t).abs() <= 1e-10);
            assert!((p.y - a * t * t * t / 3.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn stable_riemannian_form_matches_textbook_form() {
        let textbook = |th: f64, t: f64| {
            let s = th.sin();
            let x = -(th - t * s).sin() / s;
            let y = (2.0 * t - 2.0 * th.cos() + (2.0 * th - 2.0 * t * s).sin() / s) / (4.0 * s);
            (x, y)
        };
        for th in [0.4, 1.0, PI / 2.0, 2.5, 4.0, 5.5] {
            for t in [0.2, 1.0, 2.7, 4.8] {
                let p = grushin_geodesic_riemannian(th, t);
                let (x, y) = textbook(th, t);
                assert!((p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12, "theta={th} t={t}");
            }
        }
    }

    #[test]
    fn general_closed_form_agrees_with_flow() {
        let g = grushin();
        for s0 in [
            CotangentState::new(-2.0, 0.5, 0.3, 0.7),
            CotangentState::new(1.5, -1.0, -0.8, 0.2),
            CotangentState::new(0.0, 2.0, -1.0, 4.0),
            CotangentState::new(0.7, 0.0, 2.0, -1.0),
        ] {
            let tr = geodesic_flow(&g, s0, 2.0, 1e-3).unwrap();
            let e = tr.endpoint();
            let c = grushin_closed_form(&s0, 2.0);
            assert!((e.x - c.x).abs() < 1e-9 && (e.y - c.y).abs() < 1e-9, "{s0:?}: {e:?} vs {c:?}");
        }
    }

    #[test]
    fn crossing_from_theta_zero_ray() {
        let g = grushin();
        let tr = geodesic_flow(&g, CotangentState::new(-1.0, 0.0, 1.0, 0.0), 2.0, 1e-3).unwrap();
        assert_eq!(tr.crossings.len(), 1);
        let r = crossing_report(&tr, &g).unwrap();
        assert!((r[0].t - 1.0).abs() < 1e-12);
        assert_eq!((r[0].vx, r[0].vy), (1.0, 0.0));
    }

    #[test]
    fn no_crossing_away_from_singular_set() {
        let tr = geodesic_flow(&grushin(), CotangentState::new(0.5, 0.0, 1.0, 0.0), 3.0, 1e-3).unwrap();
        assert!(tr.crossings.is_empty());
    }

    #[test]
    fn integrated_flow_for_perturbed_frame_conserves_energy() {
        let fr = FrameSpec::f2(PhiPreset::gaussian_bump(0.3, 0.8));
        let th: f64 = 0.6;
        let f0 = fr.f(Point::new(-1.0, 1.0)).unwrap().abs();
        let s0 = CotangentState::new(-1.0, 1.0, th.cos(), th.sin() / f0);
        let tr = geodesic_flow(&fr, s0, 3.0, 1e-3).unwrap();
        assert!(tr.max_energy_drift < 1e-9);
        assert!(!tr.crossings.is_empty());
    }

    #[test]
    fn oversized_step_is_reported() {
        let s0 = CotangentState::new(0.0, 0.0, 1.0, 30.0);
        let err = geodesic_flow(&grushin(), s0, 5.0, 0.2).unwrap_err();
        assert!(matches!(err, GeodesicError::StepSizeTooLarge { .. }));
    }

    #[test]
    fn invalid_flow_inputs() {
        let g = grushin();
        let s0 = CotangentState::new(0.0, 0.0, 1.0, 0.0);
        assert!(geodesic_flow(&g, s0, 1.0, 0.0).is_err());
        assert!(geodesic_flow(&g, s0, -1.0, 0.1).is_err());
        assert!(geodesic_flow(&g, CotangentState::new(1.0, 0.0, 0.0, 0.0), 1.0, 0.1).is_err());
    }

    #[test]
    fn front_from_singular_set() {
        let fr = front(&grushin(), FrontStart::SingularSet { y: 0.0 }, 1.0, 64).unwrap();
        assert_eq!(fr.provenance, Provenance::ClosedForm);
        let xmax = fr.points.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
        assert_relative_eq!(xmax, 1.0, max_relative = 1e-15);
        let extreme: Vec<_> = fr.points.iter().filter(|p| p.x.abs() == xmax).collect();
        assert!(extreme.iter().all(|p| p.param == 0.0 && p.y == 0.0));
        assert_eq!(extreme.len(), 2);
    }

    #[test]
    fn front_at_time_zero_collapses() {
        for start in [FrontStart::Point { x: -1.0, y: 0.5 }, FrontStart::SingularSet { y: 0.5 }] {
            let fr = front(&grushin(), start, 0.0, 16).unwrap();
            assert!(fr.points.iter().all(|p| p.y == 0.5 && (p.x == -1.0 || p.x == 0.0)));
        }
    }

    #[test]
    fn front_needs_enough_samples() {
        assert!(front(&grushin(), FrontStart::SingularSet { y: 0.0 }, 1.0, 4).is_err());
    }

    #[test]
    fn integrated_front_matches_closed_form() {
        // alpha = 1 but routed through the integrator via a zero polynomial phi
        let integrated = FrameSpec::f2(PhiPreset::Polynomial { coefficients: vec![vec![0.0]] }).with_domain(Domain::Plane);
        let start = FrontStart::Point { x: -1.0, y: 0.0 };
        let a = front_with(&integrated, start, 1.5, 12, &FrontOptions { dt: 1e-3, ..Default::default() }).unwrap();
        let b = front(&grushin(), start, 1.5, 12).unwrap();
        assert_eq!(a.provenance, Provenance::Integrated);
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
        }
    }

    #[test]
    fn riemannian_front_self_intersects_past_the_singular_set() {
        let fr = front(&grushin(), FrontStart::Point { x: -1.0, y: 0.0 }, 4.8, 720).unwrap();
        assert!(fr.points.iter().any(|p| p.x > 0.0));
        let hits = front_self_intersections(&fr);
        assert!(hits.iter().any(|p| p[0] > 0.0), "{hits:?}");
    }
}
