//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the eigenvectors.

use crate::SpectralError;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// Sub/super-diagonal, length `n - 1`.
    pub off: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm, largest-magnitude entry positive.
    pub vector: Vec<f64>,
    /// `||A v - lambda v||`.
    pub residual: f64,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal must have n - 1 entries");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `lambda` (negative LDL^T pivots).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let guard = f64::MIN_POSITIVE.sqrt() * self.norm().max(1.0);
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let coupling = if i > 0 { self.off[i - 1] * self.off[i - 1] / q } else { 0.0 };
            q = self.diag[i] - lambda - coupling;
            if q.abs() < guard {
                q = -guard;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue (0-based), bisected to roundoff.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        assert!(index < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = self.norm().max(f64::MIN_POSITIVE);
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * (lo.abs().max(hi.abs())) + f64::MIN_POSITIVE * scale {
                break;
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `m` eigenpairs in ascending order.
    pub fn lowest_eigenpairs(&self, m: usize) -> Result<Vec<EigenPair>, SpectralError> {
        let n = self.len();
        if m > n {
            return Err(SpectralError::InvalidParameter(format!("asked for {m} eigenpairs of a {n}x{n} matrix")));
        }
        let norm = self.norm();
        let mut pairs: Vec<EigenPair> = Vec::with_capacity(m);
        for index in 0..m {
            let value = self.eigenvalue(index);
            let cluster: Vec<&Vec<f64>> = pairs
                .iter()
                .filter(|p| (p.value - value).abs() <= 1e-7 * norm.max(1.0))
                .map(|p| &p.vector)
                .collect();
            let (vector, residual) = self.inverse_iteration(value, &cluster);
            if !(residual <= 1e-8 * norm.max(1.0)) {
                return Err(SpectralError::ConvergenceFailure { index, residual });
            }
            pairs.push(EigenPair { value, vector, residual });
        }
        Ok(pairs)
    }

    fn inverse_iteration(&self, shift: f64, cluster: &[&Vec<f64>]) -> (Vec<f64>, f64) {
        let n = self.len();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let lu = ShiftedLu::factor(self, shift, f64::EPSILON * norm);
        // deterministic start vector with no special symmetry
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_7).sin()).collect();
        let mut residual = f64::INFINITY;
        for iteration in 0..8 {
            let mut x = lu.solve(&v);
            for u in cluster {
                let d = dot(&x, u);
                x.iter_mut().zip(u.iter()).for_each(|(xi, ui)| *xi -= d * ui);
            }
            let nx = dot(&x, &x).sqrt();
            if !(nx > 0.0 && nx.is_finite()) {
                break;
            }
            x.iter_mut().for_each(|xi| *xi /= nx);
            let av = self.apply(&x);
            residual = av.iter().zip(&x).map(|(a, xi)| (a - shift * xi).powi(2)).sum::<f64>().sqrt();
            v = x;
            if iteration >= 1 && residual <= 1e-12 * norm {
                break;
            }
        }
        let imax = v.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map_or(0, |(i, _)| i);
        if v[imax] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        (v, residual)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorization with partial pivoting of `T - shift I`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for di in d.iter_mut() {
            if di.abs() < tiny {
                *di = if *di < 0.0 { -tiny } else { tiny };
            }
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let t = laplacian(n);
        let pairs = t.lowest_eigenpairs(5).unwrap();
        for (j, p) in pairs.iter().enumerate() {
            let exact = 4.0 * (((j + 1) as f64) * PI / (2.0 * (n + 1) as f64)).sin().powi(2);
            assert!((p.value - exact).abs() < 1e-13, "{} vs {exact}", p.value);
            assert!(p.residual < 1e-12);
        }
        // ground state is single-signed
        assert!(pairs[0].vector.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn shifted_solve_with_pivoting() {
        let t = SymTridiagonal::new(vec![0.0, 1.0, -2.0, 3.0], vec![5.0, 0.5, 1e-3]);
        let lu = ShiftedLu::factor(&t, 0.25, 1e-300);
        let x = [1.0, -2.0, 0.5, 4.0];
        let mut b = t.apply(&x);
        b.iter_mut().zip(&x).for_each(|(bi, xi)| *bi -= 0.25 * xi);
        let got = lu.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn too_many_pairs_requested() {
        assert!(laplacian(4).lowest_eigenpairs(5).is_err());
    }

    proptest! {
        #[test]
        fn sturm_count_is_monotone_and_brackets(diag in prop::collection::vec(-5.0f64..5.0, 8), off in prop::collection::vec(-2.0f64..2.0, 7)) {
            let t = SymTridiagonal::new(diag, off);
            let vals: Vec<f64> = (0..8).map(|k| t.eigenvalue(k)).collect();
            for w in vals.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12);
            }
            let trace: f64 = t.diag.iter().sum();
            prop_assert!((vals.iter().sum::<f64>() - trace).abs() < 1e-9);
            for (k, v) in vals.iter().enumerate() {
                prop_assert!(t.sturm_count(v - 1e-7) <= k);
                prop_assert!(t.sturm_count(v + 1e-7) > k);
            }
        }
    }
}
