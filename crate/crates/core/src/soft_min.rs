//! Soft-min mixture likelihood over candidate centroids.
//!
//! Each data row contributes `log sum_j q_j exp(-beta * d(x_i, c_j))` and the
//! loss is the per-row average. The weights `q` live on the probability
//! simplex. The log-likelihood is concave in `q`, so the [`Objective`]
//! implementation exposes its negation for the shared minimization contract.
//!
//! The exponent table is independent of `q`, so each row's max-shifted terms
//! `exp(-beta d_ij - m_i)` are computed once at construction. Evaluation and
//! gradient are then O(n k) and exactly equal to the max-shifted
//! log-sum-exp, stable for arbitrarily large `beta * d`.

use crate::eigen::SymMatrix;
use crate::metric::Divergence;
use crate::objective::Objective;
use crate::vector::{check_finite, CompensatedSum};
use crate::{Error, Result};

pub const SIMPLEX_SUM_TOL: f64 = 1e-9;

/// Errors unless `q` is entrywise nonnegative with coordinates summing to 1
/// within [`SIMPLEX_SUM_TOL`].
pub fn validate_q(q: &[f64]) -> Result<()> {
    check_finite(q, "mixture weights")?;
    if let Some((j, v)) = q.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NotOnSimplex(format!("entry {j} is negative ({v})")));
    }
    let sum: f64 = compensated(q);
    if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
        return Err(Error::NotOnSimplex(format!("coordinates sum to {sum}")));
    }
    Ok(())
}

fn compensated(xs: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

#[derive(Debug, Clone)]
pub struct SoftMin {
    /// Row-major `n x k` table of `exp(-beta d_ij - row_shift_i)`.
    shifted_exp: Vec<f64>,
    /// Per-row shift `m_i = max_j (-beta d_ij)`.
    row_shift: Vec<f64>,
    n: usize,
    k: usize,
}

impl SoftMin {
    /// Builds the loss for `data` rows scored against `candidates` under the
    /// given divergence at inverse temperature `beta >= 0`.
    pub fn new(
        data: &[Vec<f64>],
        candidates: &[Vec<f64>],
        beta: f64,
        divergence: Divergence,
    ) -> Result<Self> {
        if data.is_empty() || candidates.is_empty() {
            return Err(Error::InvalidParameter(
                "soft-min needs data and candidates".into(),
            ));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and nonnegative, got {beta}"
            )));
        }
        let n = data.len();
        let k = candidates.len();
        let mut exponents = vec![0.0; n * k];
        for (i, x) in data.iter().enumerate() {
            for (j, c) in candidates.iter().enumerate() {
                exponents[i * k + j] = -beta * divergence.eval(x, c)?;
            }
        }
        let mut row_shift = vec![0.0; n];
        for i in 0..n {
            let row = &mut exponents[i * k..(i + 1) * k];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row_shift[i] = m;
            for e in row.iter_mut() {
                *e = (*e - m).exp();
            }
        }
        Ok(Self {
            shifted_exp: exponents,
            row_shift,
            n,
            k,
        })
    }

    /// Candidate set equal to the data itself (`k = n`).
    pub fn self_mixture(points: &[Vec<f64>], beta: f64, divergence: Divergence) -> Result<Self> {
        Self::new(points, points, beta, divergence)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_candidates(&self) -> usize {
        self.k
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.shifted_exp[i * self.k..(i + 1) * self.k]
    }

    fn mixture_sum(&self, i: usize, q: &[f64]) -> Result<f64> {
        let s: f64 = self.row(i).iter().zip(q).map(|(e, w)| e * w).sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::NonFinite(format!(
                "mixture likelihood vanished at row {i}"
            )));
        }
        Ok(s)
    }

    /// Average log mixture likelihood, before negation.
    pub fn log_mixture_value(&self, q: &[f64]) -> Result<f64> {
        self.check_q(q)?;
        let mut acc = CompensatedSum::new();
        for i in 0..self.n {
            acc.add(self.row_shift[i] + self.mixture_sum(i, q)?.ln());
        }
        Ok(acc.value() / self.n as f64)
    }

    /// Gradient of the average log mixture likelihood, before negation.
    pub fn log_mixture_grad(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_q(q)?;
        let mut g = vec![0.0; self.k];
        for i in 0..self.n {
            let s = self.mixture_sum(i, q)?;
            for (out, e) in g.iter_mut().zip(self.row(i)) {
                *out += e / s;
            }
        }
        let inv_n = 1.0 / self.n as f64;
        g.iter_mut().for_each(|x| *x *= inv_n);
        Ok(g)
    }

    fn check_q(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: q.len(),
            });
        }
        validate_q(q)
    }
}

impl Objective for SoftMin {
    fn value(&self, q: &[f64]) -> Result<f64> {
        Ok(-self.log_mixture_value(q)?)
    }

    fn grad(&self, q: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.log_mixture_grad(q)?;
        g.iter_mut().for_each(|x| *x = -*x);
        Ok(g)
    }

    /// Hessian of the negated likelihood: the positive semidefinite Gram
    /// matrix `(1/n) sum_i e_i e_i^T / s_i^2`.
    fn hessian(&self, q: &[f64]) -> Option<SymMatrix> {
        self.check_q(q).ok()?;
        let mut h = SymMatrix::zeros(self.k);
        for i in 0..self.n {
            let s = self.mixture_sum(i, q).ok()?;
            let row = self.row(i);
            for a in 0..self.k {
                let ra = row[a] / s;
                if ra == 0.0 {
                    continue;
                }
                for b in a..self.k {
                    h.set(a, b, h.get(a, b) + ra * row[b] / s);
                }
            }
        }
        let inv_n = 1.0 / self.n as f64;
        for a in 0..self.k {
            for b in a..self.k {
                h.set(a, b, h.get(a, b) * inv_n);
            }
        }
        Some(h)
    }

    fn n_points(&self) -> usize {
        self.n
    }

    fn param_dim(&self) -> usize {
        self.k
    }
}
