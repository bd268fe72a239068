//! Martinet structure on `R^3`: frame `X1 = ∂x + (y^2/2) ∂z`, `X2 = ∂y`,
//! singular on the plane `y = 0`. With the Popp volume `dx dy dz / |y|` the
//! sub-Riemannian Laplacian is `X1^2 + ∂y^2 - (1/y) ∂y`. In the Fourier mode
//! `exp(i (k x + l z))` and after `f = sqrt|y| g` it reduces to
//! `-g'' + V g` with `V(y) = (k + l y^2/2)^2 + 3/(4 y^2)`.

use serde::Serialize;

use crate::spectral::{assemble_schrodinger, EigenPair, StaggeredGrid, SymTridiagonal};
use crate::{FrameError, SpectralError};

pub type Point3 = [f64; 3];

pub fn x1(p: Point3) -> Point3 {
    [1.0, 0.0, 0.5 * p[1] * p[1]]
}

pub fn x2(_p: Point3) -> Point3 {
    [0.0, 1.0, 0.0]
}

/// `[X, Y] = DY·X - DX·Y` with central-difference Jacobians.
pub fn lie_bracket(x: impl Fn(Point3) -> Point3, y: impl Fn(Point3) -> Point3, p: Point3, h: f64) -> Point3 {
    let directional = |v: &dyn Fn(Point3) -> Point3, dir: Point3| {
        let plus = v([p[0] + h * dir[0], p[1] + h * dir[1], p[2] + h * dir[2]]);
        let minus = v([p[0] - h * dir[0], p[1] - h * dir[1], p[2] - h * dir[2]]);
        [0, 1, 2].map(|i| (plus[i] - minus[i]) / (2.0 * h))
    };
    let dy_x = directional(&y, x(p));
    let dx_y = directional(&x, y(p));
    [0, 1, 2].map(|i| dy_x[i] - dx_y[i])
}

/// `X3 = [X1, X2] = -y ∂z`.
pub fn x3(p: Point3) -> Point3 {
    [0.0, 0.0, -p[1]]
}

fn check_regular(y: f64) -> Result<(), FrameError> {
    if y == 0.0 || !y.is_finite() {
        return Err(FrameError::SingularPoint { x: f64::NAN, y });
    }
    Ok(())
}

/// Popp density `1/|y|` with respect to `dx dy dz`.
pub fn popp_density(y: f64) -> Result<f64, FrameError> {
    check_regular(y)?;
    Ok(1.0 / y.abs())
}

/// Popp density assembled from the adapted frame: `1/|det(X1, X2, X3)|`.
pub fn popp_density_from_frame(p: Point3) -> Result<f64, FrameError> {
    check_regular(p[1])?;
    let (a, b, c) = (x1(p), x2(p), x3(p));
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    Ok(1.0 / det.abs())
}

/// `Δ = dxx ∂x^2 + dxz ∂x∂z + dzz ∂z^2 + dyy ∂y^2 + dy ∂y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MartinetCoeffs {
    pub dxx: f64,
    pub dxz: f64,
    pub dzz: f64,
    pub dyy: f64,
    pub dy: f64,
}

pub fn martinet_laplacian_coeffs(p: Point3) -> Result<MartinetCoeffs, FrameError> {
    let y = p[1];
    check_regular(y)?;
    let y2 = y * y;
    Ok(MartinetCoeffs { dxx: 1.0, dxz: y2, dzz: 0.25 * y2 * y2, dyy: 1.0, dy: -1.0 / y })
}

pub fn mode_potential(k: i64, l: i64, y: f64) -> f64 {
    let s = k as f64 + 0.5 * l as f64 * y * y;
    s * s + 0.75 / (y * y)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartinetMode {
    pub k: i64,
    pub l: i64,
    pub grid: StaggeredGrid,
    pub potential: Vec<f64>,
    #[serde(skip)]
    pub matrix: SymTridiagonal,
}

/// Half-line mode operator `-d^2/dy^2 + V_(k,l)` on `(0, y_max)`. Each
/// eigenvalue occurs twice on the full line (even and odd copies).
pub fn assemble_martinet_mode(k: i64, l: i64, n: usize, y_max: f64) -> Result<MartinetMode, SpectralError> {
    let grid = StaggeredGrid::new(n, y_max)?;
    let (potential, matrix) = assemble_schrodinger(&grid, |y| mode_potential(k, l, y));
    Ok(MartinetMode { k, l, grid, potential, matrix })
}

pub fn martinet_mode_pairs(k: i64, l: i64, n: usize, y_max: f64, m: usize) -> Result<Vec<EigenPair>, SpectralError> {
    assemble_martinet_mode(k, l, n, y_max)?.matrix.lowest_eigenpairs(m)
}

pub fn martinet_mode_solve(k: i64, l: i64, n: usize, y_max: f64, m: usize) -> Result<Vec<f64>, SpectralError> {
    Ok(martinet_mode_pairs(k, l, n, y_max, m)?.into_iter().map(|p| p.value).collect())
}
