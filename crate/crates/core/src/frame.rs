//! Almost-Riemannian frames in normal form and their pointwise geometry.
//!
//! A frame is the orthonormal pair `X1 = (1, 0)`, `X2 = (0, f(x, y))`. The
//! variants differ only in the frame function `f`:
//!
//! | variant        | `f(x, y)`        | singular set |
//! |----------------|------------------|--------------|
//! | `F1`           | `exp(phi)`       | empty        |
//! | `F2`           | `x * exp(phi)`   | `x = 0`      |
//! | `AlphaGrushin` | `abs(x)^alpha`   | `x = 0`      |
//!
//! Off the singular set the frame defines the Riemannian metric
//! `diag(1, 1/f^2)` with area density `1/|f|`. Quantities that blow up on the
//! singular set are reported as [`FrameError::SingularPoint`] instead of
//! being returned as infinities.
//!
//! The Martinet structure is three-dimensional and lives in
//! [`crate::martinet`]; it is carried here as a tag so configuration files
//! can name it, and the planar operations reject it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quadrature;
use crate::FrameError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Plane or cylinder `R x T` with `y` periodic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    Plane,
    Cylinder {
        #[serde(default = "two_pi")]
        period: f64,
    },
}

fn two_pi() -> f64 {
    2.0 * PI
}

impl Default for Domain {
    fn default() -> Self {
        Domain::Cylinder { period: 2.0 * PI }
    }
}

impl Domain {
    pub fn cylinder() -> Self {
        Self::default()
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            Domain::Plane => None,
            Domain::Cylinder { period } => Some(*period),
        }
    }

    /// Reduces `y` into `[0, period)` on the cylinder.
    pub fn normalize(&self, p: Point) -> Point {
        match self {
            Domain::Plane => p,
            Domain::Cylinder { period } => {
                let mut y = p.y.rem_euclid(*period);
                // rem_euclid can round up to the period itself
                if y >= *period {
                    y = 0.0;
                }
                Point::new(p.x, y)
            }
        }
    }

    /// Shortest signed displacement from `y0` to `y1`.
    pub fn displacement(&self, y0: f64, y1: f64) -> f64 {
        match self {
            Domain::Plane => y1 - y0,
            Domain::Cylinder { period } => {
                let d = (y1 - y0).rem_euclid(*period);
                if d > 0.5 * period {
                    d - period
                } else {
                    d
                }
            }
        }
    }
}

/// Value and derivatives of the scalar field `phi` at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhiJet {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
}

/// A user-supplied smooth scalar field with analytic derivatives.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn jet(&self, x: f64, y: f64) -> PhiJet;
}

/// Named scalar fields that can be written in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiPreset {
    Zero,
    /// `a * exp(-(x-cx)^2 / (2 s^2)) * exp(-(1 - cos(y-cy)) / s^2)`; the
    /// `y` factor is the periodic Gaussian, so the field is smooth on the
    /// cylinder.
    GaussianBump {
        amplitude: f64,
        sigma: f64,
        #[serde(default)]
        center_x: f64,
        #[serde(default = "pi")]
        center_y: f64,
    },
    /// `sum_ij coefficients[i][j] * x^i * y^j`.
    Polynomial { coefficients: Vec<Vec<f64>> },
}

fn pi() -> f64 {
    PI
}

impl PhiPreset {
    pub fn gaussian_bump(amplitude: f64, sigma: f64) -> Self {
        PhiPreset::GaussianBump { amplitude, sigma, center_x: 0.0, center_y: PI }
    }

    pub fn jet(&self, x: f64, y: f64) -> PhiJet {
        match self {
            PhiPreset::Zero => PhiJet::default(),
            PhiPreset::GaussianBump { amplitude, sigma, center_x, center_y } => {
                let s2 = sigma * sigma;
                let dx = x - center_x;
                let dy = y - center_y;
                let ex = (-dx * dx / (2.0 * s2)).exp();
                let ey = (-(1.0 - dy.cos()) / s2).exp();
                let ex1 = -dx / s2;
                let ex2 = dx * dx / (s2 * s2) - 1.0 / s2;
                let ey1 = -dy.sin() / s2;
                let ey2 = dy.sin().powi(2) / (s2 * s2) - dy.cos() / s2;
                let value = amplitude * ex * ey;
                PhiJet {
                    value,
                    dx: value * ex1,
                    dy: value * ey1,
                    dxx: value * ex2,
                    dyy: value * ey2,
                }
            }
            PhiPreset::Polynomial { coefficients } => {
                let mut jet = PhiJet::default();
                for (i, row) in coefficients.iter().enumerate() {
                    for (j, &c) in row.iter().enumerate() {
                        if c == 0.0 {
                            continue;
                        }
                        let (i, j) = (i as i32, j as i32);
                        let xi = x.powi(i);
                        let yj = y.powi(j);
                        jet.value += c * xi * yj;
                        if i >= 1 {
                            jet.dx += c * i as f64 * x.powi(i - 1) * yj;
                        }
                        if i >= 2 {
                            jet.dxx += c * (i * (i - 1)) as f64 * x.powi(i - 2) * yj;
                        }
                        if j >= 1 {
                            jet.dy += c * j as f64 * xi * y.powi(j - 1);
                        }
                        if j >= 2 {
                            jet.dyy += c * (j * (j - 1)) as f64 * xi * y.powi(j - 2);
                        }
                    }
                }
                jet
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Phi {
    Preset(PhiPreset),
    Custom(Arc<dyn ScalarField>),
}

impl Phi {
    pub fn zero() -> Self {
        Phi::Preset(PhiPreset::Zero)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Phi::Preset(PhiPreset::Zero))
    }

    pub fn jet(&self, x: f64, y: f64) -> PhiJet {
        match self {
            Phi::Preset(p) => p.jet(x, y),
            Phi::Custom(field) => field.jet(x, y),
        }
    }
}

impl From<PhiPreset> for Phi {
    fn from(p: PhiPreset) -> Self {
        Phi::Preset(p)
    }
}

#[derive(Clone, Debug)]
pub enum FrameKind {
    F1(Phi),
    F2(Phi),
    AlphaGrushin { alpha: f64 },
    Martinet,
}

impl FrameKind {
    pub fn name(&self) -> &'static str {
        match self {
            FrameKind::F1(_) => "F1",
            FrameKind::F2(_) => "F2",
            FrameKind::AlphaGrushin { .. } => "alpha-grushin",
            FrameKind::Martinet => "martinet",
        }
    }
}

/// `f` and the derivatives of `f` needed by the metric, curvature and
/// Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameJet {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
}

/// Pointwise Riemannian data off the singular set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricData {
    pub g11: f64,
    pub g22: f64,
    pub omega: f64,
    pub curvature: f64,
    pub f_value: f64,
    pub f_x: f64,
}

/// Coefficients of `a_xx d_xx + a_yy d_yy + b_x d_x + b_y d_y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplacianCoeffs {
    pub a_xx: f64,
    pub a_yy: f64,
    pub b_x: f64,
    pub b_y: f64,
}

#[derive(Clone, Debug)]
pub struct FrameSpec {
    pub kind: FrameKind,
    pub domain: Domain,
    /// When set, `phi` is multiplied by a C^2 cutoff that equals 1 for
    /// `|x| <= x_flat / 2` and 0 for `|x| >= x_flat`.
    pub x_flat: Option<f64>,
}

impl FrameSpec {
    pub fn new(kind: FrameKind, domain: Domain) -> Result<Self, FrameError> {
        if let FrameKind::AlphaGrushin { alpha } = kind {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(FrameError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
            }
        }
        if let Domain::Cylinder { period } = domain {
            if !(period > 0.0 && period.is_finite()) {
                return Err(FrameError::InvalidParameter(format!("period must be positive, got {period}")));
            }
        }
        Ok(Self { kind, domain, x_flat: None })
    }

    /// The Grushin plane (F2 with `phi = 0`) on the standard cylinder.
    pub fn grushin() -> Self {
        Self { kind: FrameKind::F2(Phi::zero()), domain: Domain::default(), x_flat: None }
    }

    pub fn f1(phi: impl Into<Phi>) -> Self {
        Self { kind: FrameKind::F1(phi.into()), domain: Domain::default(), x_flat: None }
    }

    pub fn f2(phi: impl Into<Phi>) -> Self {
        Self { kind: FrameKind::F2(phi.into()), domain: Domain::default(), x_flat: None }
    }

    pub fn alpha_grushin(alpha: f64) -> Result<Self, FrameError> {
        Self::new(FrameKind::AlphaGrushin { alpha }, Domain::default())
    }

    pub fn martinet() -> Self {
        Self { kind: FrameKind::Martinet, domain: Domain::default(), x_flat: None }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_x_flat(mut self, x_flat: f64) -> Result<Self, FrameError> {
        if !(x_flat > 0.0) {
            return Err(FrameError::InvalidParameter(format!("x_flat must be positive, got {x_flat}")));
        }
        self.x_flat = Some(x_flat);
        Ok(self)
    }

    /// True when `f = x` exactly, so the closed-form Grushin geodesics apply.
    pub fn is_exact_grushin(&self) -> bool {
        match &self.kind {
            FrameKind::F2(phi) => phi.is_zero(),
            FrameKind::AlphaGrushin { alpha } => *alpha == 1.0,
            _ => false,
        }
    }

    /// Whether the frame degenerates on the line `x = 0`.
    pub fn has_singular_set(&self) -> bool {
        matches!(self.kind, FrameKind::F2(_) | FrameKind::AlphaGrushin { .. })
    }

    pub fn phi(&self) -> Option<&Phi> {
        match &self.kind {
            FrameKind::F1(phi) | FrameKind::F2(phi) => Some(phi),
            _ => None,
        }
    }

    /// `phi` and its derivatives, with the optional flattening cutoff applied.
    pub fn phi_jet(&self, p: Point) -> PhiJet {
        let Some(phi) = self.phi() else {
            return PhiJet::default();
        };
        let p = self.domain.normalize(p);
        let raw = phi.jet(p.x, p.y);
        match self.x_flat {
            None => raw,
            Some(x_flat) => {
                let (c, c1, c2) = flat_cutoff(p.x, x_flat);
                PhiJet {
                    value: c * raw.value,
                    dx: c1 * raw.value + c * raw.dx,
                    dy: c * raw.dy,
                    dxx: c2 * raw.value + 2.0 * c1 * raw.dx + c * raw.dxx,
                    dyy: c * raw.dyy,
                }
            }
        }
    }

    /// The frame function and its derivatives at `p`.
    pub fn jet(&self, p: Point) -> Result<FrameJet, FrameError> {
        match &self.kind {
            FrameKind::F1(_) => {
                let phi = self.phi_jet(p);
                let e = phi.value.exp();
                Ok(FrameJet { f: e, fx: e * phi.dx, fy: e * phi.dy, fxx: e * (phi.dx * phi.dx + phi.dxx) })
            }
            FrameKind::F2(_) => {
                let phi = self.phi_jet(p);
                let e = phi.value.exp();
                let x = p.x;
                Ok(FrameJet {
                    f: x * e,
                    fx: e * (1.0 + x * phi.dx),
                    fy: x * e * phi.dy,
                    fxx: e * (2.0 * phi.dx + x * phi.dx * phi.dx + x * phi.dxx),
                })
            }
            FrameKind::AlphaGrushin { alpha } => {
                let a = *alpha;
                let ax = p.x.abs();
                let s = sign(p.x);
                Ok(FrameJet {
                    f: ax.powf(a),
                    fx: a * s * ax.powf(a - 1.0),
                    fy: 0.0,
                    fxx: a * (a - 1.0) * ax.powf(a - 2.0),
                })
            }
            FrameKind::Martinet => Err(self.unsupported("planar frame evaluation")),
        }
    }

    pub fn f(&self, p: Point) -> Result<f64, FrameError> {
        match &self.kind {
            FrameKind::AlphaGrushin { alpha } => Ok(p.x.abs().powf(*alpha)),
            _ => self.jet(p).map(|j| j.f),
        }
    }

    /// `f * df/dx`, the factor in the `x`-force of the geodesic flow. It is
    /// finite on the singular set whenever `f^2` is differentiable there.
    pub fn f_fx(&self, p: Point) -> Result<f64, FrameError> {
        match &self.kind {
            FrameKind::AlphaGrushin { alpha } => {
                if p.x == 0.0 {
                    return Ok(0.0);
                }
                Ok(alpha * sign(p.x) * p.x.abs().powf(2.0 * alpha - 1.0))
            }
            _ => self.jet(p).map(|j| j.f * j.fx),
        }
    }

    fn unsupported(&self, operation: &'static str) -> FrameError {
        FrameError::UnsupportedFrame { variant: self.kind.name(), operation }
    }

    fn regular_jet(&self, p: Point) -> Result<FrameJet, FrameError> {
        let jet = self.jet(p)?;
        if jet.f == 0.0 {
            return Err(FrameError::SingularPoint { x: p.x, y: p.y });
        }
        Ok(jet)
    }

    /// The orthonormal pair `(X1, X2)` at `p`; defined on the singular set too.
    pub fn frame_vectors(&self, p: Point) -> Result<([f64; 2], [f64; 2]), FrameError> {
        let f = self.f(p)?;
        Ok(([1.0, 0.0], [0.0, f]))
    }

    pub fn metric_at(&self, p: Point) -> Result<MetricData, FrameError> {
        let j = self.regular_jet(p)?;
        let f2 = j.f * j.f;
        Ok(MetricData {
            g11: 1.0,
            g22: 1.0 / f2,
            omega: 1.0 / j.f.abs(),
            curvature: (j.f * j.fxx - 2.0 * j.fx * j.fx) / f2,
            f_value: j.f,
            f_x: j.fx,
        })
    }

    /// Horizontal gradient `X1(u) X1 + X2(u) X2` from the differential `du`.
    pub fn gradient(&self, p: Point, du: [f64; 2]) -> Result<[f64; 2], FrameError> {
        let f = self.f(p)?;
        Ok([du[0], f * f * du[1]])
    }

    /// Riemannian divergence of `v`, given its diagonal Jacobian entries
    /// `dv = (d v1/dx, d v2/dy)`.
    pub fn divergence(&self, p: Point, v: [f64; 2], dv: [f64; 2]) -> Result<f64, FrameError> {
        let j = self.regular_jet(p)?;
        Ok(dv[0] + dv[1] - (j.fx / j.f) * v[0] - (j.fy / j.f) * v[1])
    }

    pub fn laplace_beltrami_coeffs(&self, p: Point) -> Result<LaplacianCoeffs, FrameError> {
        let j = self.regular_jet(p)?;
        Ok(LaplacianCoeffs { a_xx: 1.0, a_yy: j.f * j.f, b_x: -j.fx / j.f, b_y: j.f * j.fy })
    }

    /// Largest deviation between the supplied derivatives of `phi` and
    /// central differences with step `h` over `samples`. Errors are O(h^2)
    /// for a consistent evaluator.
    pub fn phi_consistency(&self, samples: &[Point], h: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &p in samples {
            let at = |dx: f64, dy: f64| self.phi_jet(Point::new(p.x + dx, p.y + dy)).value;
            let jet = self.phi_jet(p);
            let c = at(0.0, 0.0);
            let fd_dx = (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h);
            let fd_dy = (at(0.0, h) - at(0.0, -h)) / (2.0 * h);
            let fd_dxx = (at(h, 0.0) - 2.0 * c + at(-h, 0.0)) / (h * h);
            let fd_dyy = (at(0.0, h) - 2.0 * c + at(0.0, -h)) / (h * h);
            for err in [fd_dx - jet.dx, fd_dy - jet.dy, fd_dxx - jet.dxx, fd_dyy - jet.dyy] {
                worst = worst.max(err.abs());
            }
        }
        worst
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Smootherstep cutoff and its first two derivatives in `x`.
fn flat_cutoff(x: f64, x_flat: f64) -> (f64, f64, f64) {
    let inner = 0.5 * x_flat;
    let ax = x.abs();
    if ax <= inner {
        return (1.0, 0.0, 0.0);
    }
    if ax >= x_flat {
        return (0.0, 0.0, 0.0);
    }
    let width = x_flat - inner;
    let t = (ax - inner) / width;
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let s1 = 30.0 * t * t * (t - 1.0) * (t - 1.0);
    let s2 = 60.0 * t * (2.0 * t - 1.0) * (t - 1.0);
    (1.0 - s, -s1 * sign(x) / width, -s2 / (width * width))
}

/// A sample `(t, x, y)` of a parametrized curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl CurveSample {
    pub const fn new(t: f64, x: f64, y: f64) -> Self {
        Self { t, x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveLength {
    Finite { length: f64 },
    /// The length integral diverges at the singular crossing at time `t`.
    Infinite { t: f64 },
}

impl CurveLength {
    pub fn is_infinite(&self) -> bool {
        matches!(self, CurveLength::Infinite { .. })
    }

    /// The finite length, or [`FrameError::NotAdmissible`].
    pub fn finite(self) -> Result<f64, FrameError> {
        match self {
            CurveLength::Finite { length } => Ok(length),
            CurveLength::Infinite { t } => Err(FrameError::NotAdmissible { t }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthOptions {
    /// Partial-sum growth across `window` levels that counts as divergence.
    pub growth_bound: f64,
    pub window: usize,
    pub max_levels: usize,
    /// Relative size of a dyadic shell below which refinement stops.
    pub tol: f64,
}

impl Default for LengthOptions {
    fn default() -> Self {
        Self { growth_bound: 1.0, window: 10, max_levels: 100, tol: 1e-14 }
    }
}

impl FrameSpec {
    /// Length of the polyline through `samples` (velocities are the finite
    /// differences between consecutive samples).
    pub fn curve_length(&self, samples: &[CurveSample]) -> Result<CurveLength, FrameError> {
        self.curve_length_with(samples, &LengthOptions::default())
    }

    pub fn curve_length_with(&self, samples: &[CurveSample], opts: &LengthOptions) -> Result<CurveLength, FrameError> {
        if matches!(self.kind, FrameKind::Martinet) {
            return Err(self.unsupported("curve_length"));
        }
        if samples.len() < 2 {
            return Err(FrameError::BadCurve("need at least two samples".into()));
        }
        if opts.window == 0 || opts.max_levels <= opts.window {
            return Err(FrameError::InvalidParameter("max_levels must exceed window >= 1".into()));
        }
        let mut total = 0.0;
        for pair in samples.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let dt = b.t - a.t;
            if !(dt > 0.0) {
                return Err(FrameError::BadCurve(format!("times must increase strictly (t = {} then {})", a.t, b.t)));
            }
            let vx = (b.x - a.x) / dt;
            let vy = self.domain.displacement(a.y, b.y) / dt;
            let seg = Segment { x0: a.x, y0: a.y, vx, vy };
            match self.segment_length(&seg, dt, a.t, opts)? {
                CurveLength::Finite { length } => total += length,
                inf => return Ok(inf),
            }
        }
        Ok(CurveLength::Finite { length: total })
    }

    fn speed(&self, x: f64, y: f64, vx: f64, vy: f64) -> f64 {
        if vy == 0.0 {
            return vx.abs();
        }
        // only reached off the singular set
        let f = self.f(Point::new(x, y)).unwrap_or(f64::NAN);
        vx.hypot(vy / f)
    }

    fn segment_length(&self, seg: &Segment, dt: f64, t0: f64, opts: &LengthOptions) -> Result<CurveLength, FrameError> {
        let regular = |a: f64, b: f64| {
            let g = |tau: f64| self.speed(seg.x0 + seg.vx * tau, seg.y0 + seg.vy * tau, seg.vx, seg.vy);
            quadrature::adaptive(&g, a, b, 1e-13 * (b - a).max(1.0))
        };
        if !self.has_singular_set() {
            return Ok(CurveLength::Finite { length: regular(0.0, dt) });
        }
        let x1 = seg.x0 + seg.vx * dt;
        if seg.x0 == 0.0 && seg.vx == 0.0 {
            // the segment runs inside the singular set
            return Ok(if seg.vy == 0.0 { CurveLength::Finite { length: 0.0 } } else { CurveLength::Infinite { t: t0 } });
        }
        let crosses = seg.x0 == 0.0 || x1 == 0.0 || (seg.x0 < 0.0) != (x1 < 0.0);
        if !crosses {
            return Ok(CurveLength::Finite { length: regular(0.0, dt) });
        }
        let tau_star = (-seg.x0 / seg.vx).clamp(0.0, dt);
        let y_star = seg.y0 + seg.vy * tau_star;
        let mut length = 0.0;
        for (side, span) in [(-1.0, tau_star), (1.0, dt - tau_star)] {
            if span <= 0.0 {
                continue;
            }
            // positions measured from the crossing so x stays exact near it
            let g = |s: f64| self.speed(side * seg.vx * s, y_star + side * seg.vy * s, seg.vx, seg.vy);
            match dyadic_singular_integral(&g, span, opts) {
                Some(v) => length += v,
                None => return Ok(CurveLength::Infinite { t: t0 + tau_star }),
            }
        }
        Ok(CurveLength::Finite { length })
    }
}

struct Segment {
    x0: f64,
    y0: f64,
    vx: f64,
    vy: f64,
}

/// Integral of `g` over `(0, span]` with a possible integrable singularity
/// at 0, by dyadic shells `[span/2^(j+1), span/2^j]`. Returns `None` when the
/// partial sums still grow by more than `growth_bound` across the last
/// `window` levels at the deepest level.
fn dyadic_singular_integral<G: Fn(f64) -> f64>(g: &G, span: f64, opts: &LengthOptions) -> Option<f64> {
    let mut sums = Vec::with_capacity(opts.max_levels);
    let mut total = 0.0;
    let mut hi = span;
    for _ in 0..opts.max_levels {
        let lo = 0.5 * hi;
        let inc = quadrature::adaptive(g, lo, hi, 1e-15 * span.max(1.0));
        if !inc.is_finite() {
            return None;
        }
        total += inc;
        sums.push(total);
        if inc <= opts.tol * total.abs() {
            return Some(total);
        }
        hi = lo;
    }
    let n = sums.len();
    let growth = sums[n - 1] - sums[n - 1 - opts.window];
    if growth > opts.growth_bound {
        return None;
    }
    // geometric tail from the last two shells
    let last = sums[n - 1] - sums[n - 2];
    let before = sums[n - 2] - sums[n - 3];
    let ratio = last / before;
    let tail = if ratio > 0.0 && ratio < 1.0 { last * ratio / (1.0 - ratio) } else { 0.0 };
    Some(total + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frame_vectors_per_variant() {
        let g = FrameSpec::grushin();
        assert_eq!(g.frame_vectors(Point::new(2.0, 0.0)).unwrap(), ([1.0, 0.0], [0.0, 2.0]));
        assert_eq!(g.frame_vectors(Point::new(0.0, 1.0)).unwrap().1, [0.0, 0.0]);
        let half = FrameSpec::alpha_grushin(0.5).unwrap();
        assert_eq!(half.frame_vectors(Point::new(4.0, 0.0)).unwrap().1, [0.0, 2.0]);
        assert!(matches!(
            FrameSpec::martinet().frame_vectors(Point::new(1.0, 1.0)),
            Err(FrameError::UnsupportedFrame { .. })
        ));
    }

    #[test]
    fn grushin_metric_and_curvature() {
        let g = FrameSpec::grushin();
        for x in [-10.0, -1.0, -0.1, 0.1, 1.0, 10.0] {
            let m = g.metric_at(Point::new(x, 0.7)).unwrap();
            assert_relative_eq!(m.curvature, -2.0 / (x * x), max_relative = 1e-15);
            assert_relative_eq!(m.omega, 1.0 / x.abs(), max_relative = 1e-15);
            assert_relative_eq!(m.omega * m.omega, m.g11 * m.g22, max_relative = 1e-15);
        }
        assert!(matches!(g.metric_at(Point::new(0.0, 3.0)), Err(FrameError::SingularPoint { .. })));
    }

    #[test]
    fn alpha_grushin_curvature() {
        for alpha in [0.25, 0.5, 1.0, 1.5, 3.0] {
            let fr = FrameSpec::alpha_grushin(alpha).unwrap();
            for x in [-2.0, 0.3, 1.7] {
                let k = fr.metric_at(Point::new(x, 0.0)).unwrap().curvature;
                assert_relative_eq!(k, -alpha * (1.0 + alpha) / (x * x), max_relative = 1e-13);
            }
        }
        assert!(FrameSpec::alpha_grushin(0.0).is_err());
    }

    #[test]
    fn flat_frame_is_euclidean() {
        let fr = FrameSpec::f1(PhiPreset::Zero);
        let m = fr.metric_at(Point::new(0.0, 0.0)).unwrap();
        assert_eq!((m.curvature, m.omega), (0.0, 1.0));
        let c = fr.laplace_beltrami_coeffs(Point::new(0.0, 1.0)).unwrap();
        assert_eq!((c.a_xx, c.a_yy, c.b_x, c.b_y), (1.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn gradient_cases() {
        let g = FrameSpec::grushin();
        assert_eq!(g.gradient(Point::new(0.3, 0.0), [0.0, 0.0]).unwrap(), [0.0, 0.0]);
        assert_eq!(g.gradient(Point::new(0.0, 1.0), [1.0, 5.0]).unwrap(), [1.0, 0.0]);
        assert_eq!(g.gradient(Point::new(2.0, 1.0), [1.0, 1.0]).unwrap(), [1.0, 4.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // u = x^2 y + sin(y); grad = (u_x, x^2 u_y) for the Grushin frame
        let g = FrameSpec::grushin().with_domain(Domain::Plane);
        let u = |x: f64, y: f64| x * x * y + y.sin();
        let (x, y, h) = (2.0, 0.4, 1e-5);
        let du = [(u(x + h, y) - u(x - h, y)) / (2.0 * h), (u(x, y + h) - u(x, y - h)) / (2.0 * h)];
        let grad = g.gradient(Point::new(x, y), du).unwrap();
        assert_relative_eq!(grad[0], 2.0 * x * y, max_relative = 1e-8);
        assert_relative_eq!(grad[1], x * x * (x * x + y.cos()), max_relative = 1e-8);
    }

    #[test]
    fn divergence_cases() {
        let g = FrameSpec::grushin();
        let p = Point::new(1.5, 0.0);
        assert_eq!(g.divergence(p, [0.0, 0.0], [0.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(g.divergence(p, [1.0, 0.0], [0.0, 0.0]).unwrap(), -1.0 / 1.5);
        // Y = (x^2, 0): 2x - x = x
        assert_relative_eq!(g.divergence(p, [2.25, 0.0], [3.0, 0.0]).unwrap(), 1.5, max_relative = 1e-15);
        assert!(g.divergence(Point::new(0.0, 0.0), [1.0, 0.0], [0.0, 0.0]).is_err());
    }

    #[test]
    fn divergence_matches_flux_quadrature() {
        // divergence theorem on a small box: (1/area) * boundary flux of omega*Y
        let g = FrameSpec::grushin().with_domain(Domain::Plane);
        let (x0, y0, r) = (0.8, 0.2, 1e-3);
        let omega = |x: f64| 1.0 / x.abs();
        let y1 = |x: f64, _y: f64| x * x;
        let flux_x = |x: f64| quadrature::gauss20(&|_y: f64| omega(x) * y1(x, 0.0), y0 - r, y0 + r);
        let area = quadrature::gauss20(&|x: f64| omega(x) * 2.0 * r, x0 - r, x0 + r);
        let div_q = (flux_x(x0 + r) - flux_x(x0 - r)) / area;
        let div = g.divergence(Point::new(x0, y0), [x0 * x0, 0.0], [2.0 * x0, 0.0]).unwrap();
        assert_relative_eq!(div, div_q, max_relative = 1e-6);
    }

    #[test]
    fn laplacian_coefficients() {
        let c = FrameSpec::grushin().laplace_beltrami_coeffs(Point::new(2.0, 1.0)).unwrap();
        assert_eq!((c.a_xx, c.a_yy, c.b_x, c.b_y), (1.0, 4.0, -0.5, 0.0));
        let alpha = 0.7;
        let x = 1.3;
        let c = FrameSpec::alpha_grushin(alpha).unwrap().laplace_beltrami_coeffs(Point::new(x, 0.0)).unwrap();
        assert_relative_eq!(c.a_yy, x.powf(2.0 * alpha), max_relative = 1e-15);
        assert_relative_eq!(c.b_x, -alpha / x, max_relative = 1e-15);
    }

    #[test]
    fn phi_presets_are_consistent() {
        let pts: Vec<Point> = (0..25).map(|i| Point::new(-2.0 + 0.17 * i as f64, 0.3 + 0.23 * i as f64)).collect();
        let bump = FrameSpec::f2(PhiPreset::gaussian_bump(0.4, 0.6));
        let poly = FrameSpec::f2(PhiPreset::Polynomial { coefficients: vec![vec![0.1, 0.2, -0.05], vec![0.3], vec![0.0, 0.1]] })
            .with_domain(Domain::Plane);
        let flat = FrameSpec::f2(PhiPreset::gaussian_bump(0.4, 2.0)).with_x_flat(1.5).unwrap();
        for fr in [bump, poly, flat] {
            let e1 = fr.phi_consistency(&pts, 1e-3);
            let e2 = fr.phi_consistency(&pts, 5e-4);
            assert!(e1 < 1e-4, "{e1}");
            // second order: halving h divides the error by about four
            assert!(e2 < 0.3 * e1 || e2 < 1e-8, "{e1} {e2}");
        }
    }

    #[test]
    fn flattened_phi_is_constant_far_out() {
        let fr = FrameSpec::f2(PhiPreset::gaussian_bump(1.0, 3.0)).with_x_flat(2.0).unwrap();
        let j = fr.phi_jet(Point::new(2.5, 1.0));
        assert_eq!(j, PhiJet::default());
        assert!(fr.phi_jet(Point::new(0.5, PI)).value > 0.9);
    }

    #[test]
    fn cylinder_normalization() {
        let d = Domain::default();
        let p = d.normalize(Point::new(1.0, -0.5));
        assert!((p.y - (2.0 * PI - 0.5)).abs() < 1e-15);
        assert!(d.normalize(Point::new(0.0, 7.0 * PI)).y < 2.0 * PI);
        assert!((d.displacement(6.2, 0.1) - (0.1 + 2.0 * PI - 6.2)).abs() < 1e-12);
    }

    fn diagonal(n: usize) -> Vec<CurveSample> {
        (0..=n).map(|i| {
            let t = -1.0 + 2.0 * i as f64 / n as f64;
            CurveSample::new(t, t, t)
        }).collect()
    }

    #[test]
    fn straight_line_along_x_axis() {
        let g = FrameSpec::grushin().with_domain(Domain::Plane);
        let s: Vec<_> = (0..=4).map(|i| CurveSample::new(i as f64 / 4.0, i as f64 / 4.0, 0.0)).collect();
        let len = g.curve_length(&s).unwrap().finite().unwrap();
        assert_relative_eq!(len, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn sqrt_grushin_diagonal_has_finite_length() {
        let exact = 2.0 * (2f64.sqrt() + 1f64.asinh());
        let half = FrameSpec::alpha_grushin(0.5).unwrap().with_domain(Domain::Plane);
        for n in [2, 3, 10] {
            let len = half.curve_length(&diagonal(n)).unwrap().finite().unwrap();
            assert!((len - exact).abs() < 1e-9, "n={n}: {len} vs {exact}");
        }
    }

    #[test]
    fn grushin_diagonal_is_not_admissible() {
        let g = FrameSpec::grushin().with_domain(Domain::Plane);
        let len = g.curve_length(&diagonal(2)).unwrap();
        assert!(len.is_infinite());
        assert!(matches!(len.finite(), Err(FrameError::NotAdmissible { .. })));
    }

    #[test]
    fn oracle_log_divergence_under_dyadic_refinement() {
        // the integral of sqrt(1 + 1/t^2) over [2^-j, 1] grows by ln 2 per level
        let g = |t: f64| (1.0 + 1.0 / (t * t)).sqrt();
        let partial = |j: i32| quadrature::adaptive(&g, 2f64.powi(-j), 1.0, 1e-12);
        let growth = partial(30) - partial(20);
        assert!((growth - 10.0 * std::f64::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn curve_inside_singular_set() {
        let g = FrameSpec::grushin().with_domain(Domain::Plane);
        let s = [CurveSample::new(0.0, 0.0, 0.0), CurveSample::new(1.0, 0.0, 1.0)];
        assert!(g.curve_length(&s).unwrap().is_infinite());
        let s = [CurveSample::new(0.0, 0.0, 0.0), CurveSample::new(1.0, 0.0, 0.0)];
        assert_eq!(g.curve_length(&s).unwrap(), CurveLength::Finite { length: 0.0 });
    }

    #[test]
    fn bad_curves_are_rejected() {
        let g = FrameSpec::grushin();
        assert!(g.curve_length(&[CurveSample::new(0.0, 1.0, 0.0)]).is_err());
        let s = [CurveSample::new(0.0, 1.0, 0.0), CurveSample::new(0.0, 2.0, 0.0)];
        assert!(matches!(g.curve_length(&s), Err(FrameError::BadCurve(_))));
    }
}
