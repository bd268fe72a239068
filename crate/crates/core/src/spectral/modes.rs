//! One-dimensional mode operators `-d^2/dx^2 + V` on a staggered half-line
//! grid and the merged spectrum over Fourier modes.

use rayon::prelude::*;
use serde::Serialize;

use super::tridiag::{EigenPair, SymTridiagonal};
use crate::SpectralError;

/// Cell-centred nodes `x_j = (j + 1/2) h` on `(0, x_max)`. The grid never
/// samples `x = 0`, which realizes the natural (limit-point) endpoint there;
/// the far end is Dirichlet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StaggeredGrid {
    pub n: usize,
    pub x_max: f64,
    pub h: f64,
}

impl StaggeredGrid {
    pub fn new(n: usize, x_max: f64) -> Result<Self, SpectralError> {
        if n < 16 {
            return Err(SpectralError::BadGrid(format!("need at least 16 nodes, got {n}")));
        }
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(SpectralError::BadGrid(format!("x_max must be positive, got {x_max}")));
        }
        Ok(Self { n, x_max, h: x_max / n as f64 })
    }

    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }
}

/// Three-point discretization of `-u'' + V u`: diagonal `V(x_j) + 2/h^2`,
/// off-diagonal `-1/h^2`.
pub fn assemble_schrodinger(grid: &StaggeredGrid, potential: impl Fn(f64) -> f64) -> (Vec<f64>, SymTridiagonal) {
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let v: Vec<f64> = grid.nodes().map(potential).collect();
    let diag = v.iter().map(|vj| vj + 2.0 * inv_h2).collect();
    (v, SymTridiagonal::new(diag, vec![-inv_h2; grid.n - 1]))
}

/// Inverse-square coefficient `(alpha/2)(alpha/2 + 1)` produced by the gauge
/// transform of the alpha-Grushin Laplacian; 3/4 at `alpha = 1`.
pub fn singular_coefficient(alpha: f64) -> f64 {
    let half = 0.5 * alpha;
    half * (half + 1.0)
}

/// Default truncation length for mode `k`: 12 for `|k| <= 1`, shrinking like
/// the decay length `|k|^(-1/(1+alpha))` of `exp(-|k| x^(1+alpha)/(1+alpha))`.
pub fn default_x_max(k: i64, alpha: f64) -> f64 {
    let k = k.unsigned_abs().max(1) as f64;
    12.0 * k.powf(-1.0 / (1.0 + alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeOperator {
    pub k: i64,
    pub alpha: f64,
    pub c: f64,
    pub grid: StaggeredGrid,
    /// `V(x_j) = k^2 x_j^(2 alpha) + c / x_j^2`.
    pub potential: Vec<f64>,
    #[serde(skip)]
    pub matrix: SymTridiagonal,
}

pub fn assemble_mode_operator(k: i64, alpha: f64, n: usize, x_max: f64) -> Result<ModeOperator, SpectralError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SpectralError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let grid = StaggeredGrid::new(n, x_max)?;
    let c = singular_coefficient(alpha);
    let k2 = (k * k) as f64;
    let (potential, matrix) = assemble_schrodinger(&grid, |x| k2 * x.powf(2.0 * alpha) + c / (x * x));
    Ok(ModeOperator { k, alpha, c, grid, potential, matrix })
}

pub fn eigen_solve(op: &ModeOperator, m: usize) -> Result<Vec<EigenPair>, SpectralError> {
    op.matrix.lowest_eigenpairs(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub k: i64,
    pub n: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumGrid {
    pub n: usize,
    /// Truncation for `|k| = 1`; other modes use [`default_x_max`] scaled by
    /// `x_max / 12`.
    pub x_max: f64,
}

impl Default for SpectrumGrid {
    fn default() -> Self {
        Self { n: 4000, x_max: 12.0 }
    }
}

/// Half-line spectrum of the gauge-transformed operator over Fourier modes
/// `-k_max..=k_max`, sorted ascending. The `k = 0` mode has no confining
/// term and is only discrete because of the truncation at `x_max`.
pub fn spectrum_2d(alpha: f64, k_max: u32, m_per_mode: usize, grid: SpectrumGrid) -> Result<Vec<SpectrumEntry>, SpectralError> {
    if k_max < 1 {
        return Err(SpectralError::InvalidParameter("k_max must be at least 1".into()));
    }
    let k_max = i64::from(k_max);
    let scale = grid.x_max / 12.0;
    let per_mode = (-k_max..=k_max)
        .into_par_iter()
        .map(|k| {
            let op = assemble_mode_operator(k, alpha, grid.n, scale * default_x_max(k, alpha))?;
            let pairs = eigen_solve(&op, m_per_mode)?;
            Ok(pairs
                .into_iter()
                .enumerate()
                .map(|(n, p)| SpectrumEntry { lambda: p.value, k, n, residual: p.residual })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    let mut all: Vec<SpectrumEntry> = per_mode.into_iter().flatten().collect();
    all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.k.cmp(&b.k)).then(a.n.cmp(&b.n)));
    Ok(all)
}

/// Richardson extrapolation from values on grids `h`, `h/2`, `h/4`, with the
/// observed order. Falls back to order 2 when the differences do not
/// contract monotonically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub order: f64,
}

pub fn richardson(coarse: f64, medium: f64, fine: f64) -> Extrapolation {
    let d1 = coarse - medium;
    let d2 = medium - fine;
    let ratio = d1 / d2;
    let order = if ratio.is_finite() && ratio > 1.0 { ratio.log2() } else { 2.0 };
    let factor = 2f64.powf(order) - 1.0;
    Extrapolation { value: fine - d2 / factor, order }
}
