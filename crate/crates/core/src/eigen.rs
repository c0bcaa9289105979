//! Packed symmetric matrices and minimum-eigenvalue routines.
//!
//! Eigenvalues are computed in-repo. Small matrices (dim <= 64) go through a
//! cyclic Jacobi sweep, which converges to machine precision. Larger matrices
//! use power iteration on the spectrally shifted matrix `sigma I - H`, where
//! `sigma` is the Gershgorin row-sum bound, so the dominant eigenvalue of the
//! shifted matrix maps back to the minimum eigenvalue of `H`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Largest dimension routed to the dense Jacobi path.
pub const JACOBI_MAX_DIM: usize = 64;
/// Largest supported dimension overall.
pub const MAX_DIM: usize = 2000;
/// Target relative accuracy of `min_eigenvalue`.
pub const EIG_REL_TOL: f64 = 1e-8;

/// Symmetric matrix storing only the upper triangle (row-major, packed).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "symmetric matrix needs dim > 0");
        Self {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle (`i <= j`), so the
    /// result is symmetric by construction.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        r * self.dim - r * (r + 1) / 2 + c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    /// Sets `(i, j)` and its mirror entry.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `a * self + b * other`.
    pub fn add_scaled(&self, a: f64, other: &SymMatrix, b: f64) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = SymMatrix::zeros(self.dim);
        for k in 0..self.data.len() {
            out.data[k] = a * self.data[k] + b * other.data[k];
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Largest absolute row sum; an upper bound on the spectral radius.
    fn row_sum_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi.
pub fn jacobi_eigenvalues(h: &SymMatrix) -> Result<Vec<f64>> {
    if !h.is_finite() {
        return Err(Error::NonFinite("symmetric matrix entries".into()));
    }
    let n = h.dim();
    let mut a = h.to_dense();
    let scale = h.row_sum_bound().max(1.0);
    let tol = 1e-14 * scale;

    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i][j].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= tol * 1e-2 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

/// Minimum eigenvalue of a symmetric matrix.
///
/// Dim <= 64 uses Jacobi; larger dims use power iteration on the shifted
/// matrix. Errors on non-finite entries or dim > 2000.
pub fn min_eigenvalue(h: &SymMatrix) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::NonFinite("symmetric matrix entries".into()));
    }
    if h.dim() > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "matrix dim {} exceeds supported maximum {}",
            h.dim(),
            MAX_DIM
        )));
    }
    if h.dim() <= JACOBI_MAX_DIM {
        return Ok(jacobi_eigenvalues(h)?[0]);
    }
    shifted_power_min(h)
}

/// Minimum eigenvalue via bisection on "`H - lambda I` admits a Cholesky
/// factorization". A deliberately independent route from the Jacobi and
/// power-iteration paths, used to cross-check them.
pub fn min_eigenvalue_bisect(h: &SymMatrix, tol: f64) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::NonFinite("symmetric matrix entries".into()));
    }
    if h.dim() > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "matrix dim {} exceeds supported maximum {}",
            h.dim(),
            MAX_DIM
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let bound = h.row_sum_bound().max(1.0);
    // All eigenvalues lie in [-bound, bound], so the bracket below starts
    // with a positive-definite left end and an indefinite right end.
    let mut lo = -bound - 1.0;
    let mut hi = bound + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cholesky_succeeds(h, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Whether `H - shift I` is positive definite, probed by attempting an
/// in-place Cholesky factorization.
fn cholesky_succeeds(h: &SymMatrix, shift: f64) -> bool {
    let n = h.dim();
    let mut a = h.to_dense();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= shift;
    }
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d <= 0.0 {
            return false;
        }
        let root = d.sqrt();
        a[j][j] = root;
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / root;
        }
    }
    true
}

/// Power iteration on `sigma I - H`; its dominant eigenvalue is
/// `sigma - lambda_min(H)`.
fn shifted_power_min(h: &SymMatrix) -> Result<f64> {
    let n = h.dim();
    let sigma = h.row_sum_bound().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e16e);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = crate::vector::norm(&v).max(f64::MIN_POSITIVE);
    v.iter_mut().for_each(|x| *x /= nv);

    let shifted_apply = |v: &[f64]| -> Vec<f64> {
        let hv = h.matvec(v);
        v.iter().zip(&hv).map(|(x, y)| sigma * x - y).collect()
    };

    // Stop on the eigenpair residual: for symmetric matrices some eigenvalue
    // lies within ||Mv - theta*v|| of the Rayleigh quotient theta, so the
    // returned value is accurate to the residual tolerance even when the
    // Rayleigh sequence has stopped moving.
    let residual_tol = EIG_REL_TOL * 1e-3 * sigma.max(1.0);
    let mut theta_prev = f64::INFINITY;
    let mut stalled = 0;
    let mut theta = 0.0;
    for _ in 0..100_000 {
        let mv = shifted_apply(&v);
        theta = crate::vector::dot(&v, &mv);
        let residual = mv
            .iter()
            .zip(&v)
            .map(|(m, x)| (m - theta * x) * (m - theta * x))
            .sum::<f64>()
            .sqrt();
        if residual <= residual_tol {
            return Ok(sigma - theta);
        }
        let nn = crate::vector::norm(&mv);
        v = mv.iter().map(|x| x / nn).collect();
        // Gap-limited spectra can keep the residual above tolerance while the
        // estimate itself is converged; bail once theta is pinned at machine
        // precision for a long stretch.
        if (theta - theta_prev).abs() <= f64::EPSILON * theta.abs().max(1.0) {
            stalled += 1;
            if stalled >= 200 {
                return Ok(sigma - theta);
            }
        } else {
            stalled = 0;
        }
        theta_prev = theta;
    }
    Ok(sigma - theta)
}
