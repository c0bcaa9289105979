//! Sum-of-norms clustering loss with pairwise coupling.
//!
//! The representative matrix `W` (one row per data point, flattened
//! row-major into the parameter vector) is pulled toward the data by a
//! fidelity term and toward itself by weighted pairwise coupling:
//!
//! `0.5 * ( sum_i ||w_i - x_i||^2 + gamma * sum_{i<j} a_ij ||w_i - w_j||^2 )`
//!
//! The Hessian factors as `(I + gamma * L) (x) I_d` where `L` is the graph
//! Laplacian of the pair weights, so its row-block coupling pattern is an
//! `n x n` matrix whose minimum eigenvalue is exactly 1 for any nonnegative
//! weights.

use crate::eigen::SymMatrix;
use crate::objective::Objective;
use crate::vector::{check_finite, CompensatedSum};
use crate::{Error, Result};

/// Symmetric nonnegative pair weights stored as a packed strict upper
/// triangle (`i < j`).
#[derive(Debug, Clone)]
pub struct PairWeights {
    n: usize,
    data: Vec<f64>,
}

impl PairWeights {
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::from_fn(n, |_, _| value)
    }

    /// Builds weights from `f(i, j)` evaluated over `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("pair weights need n >= 1".into()));
        }
        let mut data = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "pair weight ({i},{j}) must be finite and nonnegative, got {v}"
                    )));
                }
                data.push(v);
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight for the unordered pair `{i, j}`; zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "pair index out of range");
        if i == j {
            return 0.0;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        // Rows above i contribute n-1 + n-2 + ... + n-i entries.
        let offset = i * (2 * self.n - i - 1) / 2;
        self.data[offset + (j - i - 1)]
    }
}

/// The coupled clustering loss over flattened representatives.
#[derive(Debug, Clone)]
pub struct SumOfNorms {
    points: Vec<Vec<f64>>,
    weights: PairWeights,
    gamma: f64,
    dim: usize,
}

impl SumOfNorms {
    pub fn new(points: Vec<Vec<f64>>, weights: PairWeights, gamma: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("need at least one point".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points need dim >= 1".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            check_finite(p, "data point")?;
        }
        if weights.n() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.n(),
            });
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be finite and nonnegative, got {gamma}"
            )));
        }
        Ok(Self {
            points,
            weights,
            gamma,
            dim,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn point_dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    fn block<'a>(&self, w: &'a [f64], i: usize) -> &'a [f64] {
        &w[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-block coupling pattern `I + gamma * L` with `L` the weighted
    /// graph Laplacian; the full Hessian is this pattern Kronecker the
    /// `dim`-dimensional identity.
    pub fn coupling_pattern(&self) -> SymMatrix {
        let n = self.n();
        let mut m = SymMatrix::identity(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.gamma * self.weights.get(i, j);
                if a != 0.0 {
                    m.set(i, j, -a);
                    m.set(i, i, m.get(i, i) + a);
                    m.set(j, j, m.get(j, j) + a);
                }
            }
        }
        m
    }
}

impl Objective for SumOfNorms {
    fn value(&self, w: &[f64]) -> Result<f64> {
        let n = self.n();
        if w.len() != n * self.dim {
            return Err(Error::DimensionMismatch {
                expected: n * self.dim,
                got: w.len(),
            });
        }
        let mut acc = CompensatedSum::new();
        for i in 0..n {
            let wi = self.block(w, i);
            let mut fit = 0.0;
            for (a, b) in wi.iter().zip(&self.points[i]) {
                fit += (a - b) * (a - b);
            }
            acc.add(fit);
        }
        for i in 0..n {
            let wi = self.block(w, i);
            for j in (i + 1)..n {
                let aij = self.weights.get(i, j);
                if aij == 0.0 {
                    continue;
                }
                let wj = self.block(w, j);
                let mut d2 = 0.0;
                for (a, b) in wi.iter().zip(wj) {
                    d2 += (a - b) * (a - b);
                }
                acc.add(self.gamma * aij * d2);
            }
        }
        Ok(0.5 * acc.value())
    }

    fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if w.len() != n * self.dim {
            return Err(Error::DimensionMismatch {
                expected: n * self.dim,
                got: w.len(),
            });
        }
        let mut g = vec![0.0; w.len()];
        for i in 0..n {
            let wi = self.block(w, i);
            let gi = &mut g[i * self.dim..(i + 1) * self.dim];
            for ((out, a), b) in gi.iter_mut().zip(wi).zip(&self.points[i]) {
                *out = a - b;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.gamma * self.weights.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..self.dim {
                    let diff = a * (w[i * self.dim + k] - w[j * self.dim + k]);
                    g[i * self.dim + k] += diff;
                    g[j * self.dim + k] -= diff;
                }
            }
        }
        Ok(g)
    }

    fn hessian(&self, _w: &[f64]) -> Option<SymMatrix> {
        let pattern = self.coupling_pattern();
        let n = self.n();
        let d = self.dim;
        let mut h = SymMatrix::zeros(n * d);
        for i in 0..n {
            for j in i..n {
                let v = pattern.get(i, j);
                if v == 0.0 {
                    continue;
                }
                for k in 0..d {
                    h.set(i * d + k, j * d + k, v);
                }
            }
        }
        Some(h)
    }

    fn n_points(&self) -> usize {
        self.n()
    }

    fn param_dim(&self) -> usize {
        self.n() * self.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::min_eigenvalue;

    fn two_point_loss(gamma: f64, alpha: f64) -> SumOfNorms {
        let points = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let weights = PairWeights::uniform(2, alpha).unwrap();
        SumOfNorms::new(points, weights, gamma).unwrap()
    }

    #[test]
    fn value_matches_hand_computation() {
        // w1 = x1, w2 = x2: only the coupling term remains, distance 2.
        let f = two_point_loss(0.5, 1.0);
        let w = [0.0, 0.0, 2.0, 0.0];
        assert!((f.value(&w).unwrap() - 0.5 * 0.5 * 4.0).abs() < 1e-15);

        // Move w1 off its point: fidelity 0.5 * 1, coupling 0.5 * 0.5 * 1.
        let w = [1.0, 0.0, 2.0, 0.0];
        assert!((f.value(&w).unwrap() - (0.5 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let points = vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, -2.0]];
        let weights = PairWeights::from_fn(3, |i, j| ((i + j) as f64) * 0.3).unwrap();
        let f = SumOfNorms::new(points, weights, 0.7).unwrap();
        let w: Vec<f64> = (0..6).map(|k| 0.1 * k as f64 - 0.2).collect();
        let g = f.grad(&w).unwrap();
        let h = 1e-6;
        for k in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += h;
            wm[k] -= h;
            let fd = (f.value(&wp).unwrap() - f.value(&wm).unwrap()) / (2.0 * h);
            assert!(
                (fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1.0),
                "coordinate {k}: fd {fd} vs analytic {}",
                g[k]
            );
        }
    }

    #[test]
    fn gradient_differences_match_hessian_products() {
        // The loss is quadratic, so grad(w) - grad(v) = H (w - v) exactly.
        let points = vec![vec![1.0], vec![2.0], vec![4.0]];
        let weights = PairWeights::uniform(3, 2.0).unwrap();
        let f = SumOfNorms::new(points, weights, 0.25).unwrap();
        let w = [0.5, 3.0, -1.0];
        let v = [2.0, -0.5, 1.5];
        let step: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a - b).collect();
        let hv = f.hessian(&w).unwrap().matvec(&step);
        let gw = f.grad(&w).unwrap();
        let gv = f.grad(&v).unwrap();
        for ((a, b), c) in gw.iter().zip(&gv).zip(&hv) {
            assert!((a - b - c).abs() < 1e-12, "{} vs {c}", a - b);
        }
    }

    #[test]
    fn coupling_pattern_is_identity_plus_scaled_laplacian() {
        let f = two_point_loss(0.5, 3.0);
        let p = f.coupling_pattern();
        // L = [[3, -3], [-3, 3]], gamma = 0.5.
        assert_eq!(p.get(0, 0), 1.0 + 1.5);
        assert_eq!(p.get(0, 1), -1.5);
        assert_eq!(p.get(1, 1), 2.5);
    }

    #[test]
    fn coupling_pattern_min_eigenvalue_is_one() {
        // The Laplacian is positive semidefinite with a zero eigenvalue on
        // the all-ones vector, so the pattern's spectrum starts exactly at 1
        // regardless of the weights.
        let points: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let weights = PairWeights::from_fn(6, |i, j| ((3 * i + j) % 5) as f64 * 0.4).unwrap();
        let f = SumOfNorms::new(points, weights, 1.3).unwrap();
        let lam = min_eigenvalue(&f.coupling_pattern()).unwrap();
        assert!((lam - 1.0).abs() < 1e-9, "lambda_min = {lam}");
    }

    #[test]
    fn full_hessian_replicates_pattern_per_coordinate() {
        let points = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let weights = PairWeights::uniform(2, 1.0).unwrap();
        let f = SumOfNorms::new(points, weights, 0.5).unwrap();
        let h = f.hessian(&[0.0; 4]).unwrap();
        let p = f.coupling_pattern();
        for bi in 0..2 {
            for bj in 0..2 {
                for k in 0..2 {
                    assert_eq!(h.get(bi * 2 + k, bj * 2 + k), p.get(bi, bj));
                }
                // Cross-coordinate entries vanish.
                assert_eq!(h.get(bi * 2, bj * 2 + 1), 0.0);
            }
        }
    }

    #[test]
    fn zero_gamma_decouples_points() {
        let f = two_point_loss(0.0, 5.0);
        let w = [3.0, 1.0, -2.0, 4.0];
        let g = f.grad(&w).unwrap();
        assert_eq!(g, vec![3.0, 1.0, -4.0, 4.0]);
        let lam = min_eigenvalue(&f.hessian(&w).unwrap()).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_weight_indexing_round_trips() {
        let w = PairWeights::from_fn(5, |i, j| (10 * i + j) as f64).unwrap();
        for i in 0..5 {
            assert_eq!(w.get(i, i), 0.0);
            for j in (i + 1)..5 {
                assert_eq!(w.get(i, j), (10 * i + j) as f64);
                assert_eq!(w.get(j, i), (10 * i + j) as f64);
            }
        }
    }

    #[test]
    fn rejects_negative_weights_and_bad_dims() {
        assert!(PairWeights::from_fn(3, |_, _| -1.0).is_err());
        let points = vec![vec![0.0], vec![1.0, 2.0]];
        let w = PairWeights::uniform(2, 1.0).unwrap();
        assert!(SumOfNorms::new(points, w, 1.0).is_err());
    }
}
