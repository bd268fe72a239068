//! Essential self-adjointness of `-d^2/dx^2 + c/x^2` at the endpoint 0.
//!
//! Solutions of `-u'' + (c/x^2) u = 0` behave like `x^s` with indicial
//! exponents `s = 1/2 +- sqrt(1/4 + c)`. The operator is limit point at 0,
//! hence essentially self-adjoint on `C_c^inf(0, inf)`, exactly when the
//! `s-` branch fails to be square integrable, i.e. `s- <= -1/2`, i.e.
//! `c >= 3/4`.

use num_complex::Complex64;
use serde::Serialize;

use super::modes::singular_coefficient;
use crate::SpectralError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EssentiallySelfAdjoint,
    NotEssentiallySelfAdjoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfAdjointnessReport {
    pub c: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub verdict: Verdict,
    /// Dimension of `L^2` solutions of `L* u = i u` contributed by the
    /// endpoint 0.
    pub deficiency_at_zero: u8,
}

/// Largest `c` that is rejected: below it the exponents are complex.
pub const HARDY_THRESHOLD: f64 = -0.25;

pub fn indicial_exponents(c: f64) -> (f64, f64) {
    let r = (0.25 + c).sqrt();
    (0.5 + r, 0.5 - r)
}

pub fn classify_self_adjoint(c: f64) -> Result<SelfAdjointnessReport, SpectralError> {
    if !(c > HARDY_THRESHOLD) || !c.is_finite() {
        return Err(SpectralError::OutOfRange(c));
    }
    let (s_plus, s_minus) = indicial_exponents(c);
    let limit_point = c >= 0.75;
    Ok(SelfAdjointnessReport {
        c,
        s_plus,
        s_minus,
        verdict: if limit_point { Verdict::EssentiallySelfAdjoint } else { Verdict::NotEssentiallySelfAdjoint },
        deficiency_at_zero: if limit_point { 0 } else { 1 },
    })
}

/// Classification of the gauge-transformed alpha-Grushin mode operator,
/// whose inverse-square coefficient is `(alpha/2)(alpha/2 + 1)`.
pub fn classify_alpha(alpha: f64) -> Result<SelfAdjointnessReport, SpectralError> {
    if !(alpha > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    classify_self_adjoint(singular_coefficient(alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeficiencyEstimate {
    pub count: u8,
    pub s_plus: f64,
    pub s_minus: f64,
    /// Size of the `x^(s+)` and `x^(s-)` components at `x = eps`.
    pub amplitude_plus: f64,
    pub amplitude_minus: f64,
    /// Relative RMS misfit of the two-branch fit on `[eps, 4 eps]`.
    pub fit_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeficiencyOptions {
    /// RK4 step in `x` on `[1, X]` and in `ln x` below 1.
    pub step: f64,
    /// Relative size below which the `x^(s-)` component counts as absent.
    pub noise_floor: f64,
}

impl Default for DeficiencyOptions {
    fn default() -> Self {
        Self { step: 1e-3, noise_floor: 1e-6 }
    }
}

pub fn deficiency_index_numeric(c: f64, eps: f64, x_outer: f64) -> Result<DeficiencyEstimate, SpectralError> {
    deficiency_index_numeric_with(c, eps, x_outer, &DeficiencyOptions::default())
}

/// Counts square-integrable solutions of `-u'' + (c/x^2) u = i u` near 0.
///
/// The solution decaying at infinity is started at `x_outer` and integrated
/// inward to `eps`. On `[eps, 4 eps]` it is fitted as `A x^(s+) + B x^(s-)`;
/// if the `x^(s-)` component is present above the noise floor the solution
/// is in `L^2` near 0 iff `s- > -1/2`, otherwise it follows the always
/// square-integrable `x^(s+)` branch.
pub fn deficiency_index_numeric_with(
    c: f64,
    eps: f64,
    x_outer: f64,
    opts: &DeficiencyOptions,
) -> Result<DeficiencyEstimate, SpectralError> {
    if !(c > HARDY_THRESHOLD) {
        return Err(SpectralError::OutOfRange(c));
    }
    if !(eps > 0.0 && eps < x_outer) {
        return Err(SpectralError::InvalidParameter(format!("need 0 < eps < X, got eps = {eps}, X = {x_outer}")));
    }
    let (s_plus, s_minus) = indicial_exponents(c);
    if s_plus - s_minus < 1e-3 {
        return Err(SpectralError::FitIllConditioned { s_plus, s_minus });
    }
    let samples = integrate_inward(c, eps, x_outer, opts.step);
    let fit = fit_branches(&samples, eps, s_plus, s_minus);
    let plus = fit.a.norm();
    let minus = fit.b.norm();
    let present = minus > opts.noise_floor * (plus + minus);
    let count = if !present || s_minus > -0.5 { 1 } else { 0 };
    Ok(DeficiencyEstimate {
        count,
        s_plus,
        s_minus,
        amplitude_plus: plus,
        amplitude_minus: minus,
        fit_residual: fit.residual,
    })
}

type Pair = [Complex64; 2];

fn rk4<F: Fn(f64, &Pair) -> Pair>(rhs: &F, s: f64, z: &Pair, h: f64) -> Pair {
    let add = |z: &Pair, k: &Pair, a: f64| [z[0] + k[0] * a, z[1] + k[1] * a];
    let k1 = rhs(s, z);
    let k2 = rhs(s + 0.5 * h, &add(z, &k1, 0.5 * h));
    let k3 = rhs(s + 0.5 * h, &add(z, &k2, 0.5 * h));
    let k4 = rhs(s + h, &add(z, &k3, h));
    [
        z[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
        z[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
    ]
}

/// Returns `(x, u(x))` samples on `[eps, 4 eps]`.
fn integrate_inward(c: f64, eps: f64, x_outer: f64, step: f64) -> Vec<(f64, Complex64)> {
    let i = Complex64::i();
    // decaying branch exp(-kappa x), kappa^2 = -i
    let kappa = Complex64::new(1.0, -1.0) / 2f64.sqrt();
    let mut u = Complex64::new(1.0, 0.0);
    let mut du = -kappa * u;

    // outer part in x: u' = p, p' = (c/x^2 - i) u
    let x_mid = x_outer.min(1.0).max(eps);
    if x_outer > x_mid {
        let rhs = |x: f64, z: &Pair| [z[1], (c / (x * x) - i) * z[0]];
        let steps = ((x_outer - x_mid) / step).ceil() as usize;
        let h = -(x_outer - x_mid) / steps as f64;
        let mut z = [u, du];
        for k in 0..steps {
            let x = x_outer + k as f64 * h;
            z = rk4(&rhs, x, &z, h);
        }
        u = z[0];
        du = z[1];
    }

    // inner part in s = ln x: u_s = w, w_s = w + (c - i x^2) u with w = x u'
    let rhs = |s: f64, z: &Pair| {
        let x = s.exp();
        [z[1], z[1] + (c - i * x * x) * z[0]]
    };
    let s_top = x_mid.ln();
    let s_bottom = eps.ln();
    let steps = (((s_top - s_bottom) / step).ceil() as usize).max(1);
    let h = -(s_top - s_bottom) / steps as f64;
    let mut z = [u, x_mid * du];
    let fit_top = (4.0 * eps).ln();
    let mut samples = Vec::new();
    for k in 0..=steps {
        let s = s_top + k as f64 * h;
        if s <= fit_top + 1e-12 {
            samples.push((s.exp(), z[0]));
        }
        if k < steps {
            z = rk4(&rhs, s, &z, h);
        }
    }
    // rescale to keep the fit well away from overflow
    let scale = samples.iter().map(|(_, u)| u.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    samples.iter().map(|&(x, u)| (x, u / scale)).collect()
}

struct BranchFit {
    a: Complex64,
    b: Complex64,
    residual: f64,
}

/// Least squares in the basis `(x/eps)^(s+)`, `(x/eps)^(s-)`, so the
/// coefficients are the branch sizes at `eps`.
fn fit_branches(samples: &[(f64, Complex64)], eps: f64, s_plus: f64, s_minus: f64) -> BranchFit {
    let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
    let (mut r1, mut r2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for &(x, u) in samples {
        let p = (x / eps).powf(s_plus);
        let m = (x / eps).powf(s_minus);
        g11 += p * p;
        g12 += p * m;
        g22 += m * m;
        r1 += u * p;
        r2 += u * m;
    }
    let det = g11 * g22 - g12 * g12;
    let a = (r1 * g22 - r2 * g12) / det;
    let b = (r2 * g11 - r1 * g12) / det;
    let (mut err, mut norm) = (0.0, 0.0);
    for &(x, u) in samples {
        let model = a * (x / eps).powf(s_plus) + b * (x / eps).powf(s_minus);
        err += (u - model).norm_sqr();
        norm += u.norm_sqr();
    }
    BranchFit { a, b, residual: (err / norm.max(f64::MIN_POSITIVE)).sqrt() }
}
