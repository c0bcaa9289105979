//! Small vector helpers over `&[f64]` plus compensated summation.
//!
//! Reductions that aggregate per-point contributions use Neumaier
//! compensation so results stay independent of accumulation order to well
//! below the 1e-10 relative level required by the reproducibility contract.

use crate::{Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`, elementwise.
pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Coordinate-wise mean of a nonempty set of equal-length points.
pub fn mean_point(points: &[Vec<f64>]) -> Vec<f64> {
    assert!(!points.is_empty());
    let d = points[0].len();
    let mut out = vec![0.0; d];
    for k in 0..d {
        out[k] = compensated_sum(points.iter().map(|p| p[k])) / points.len() as f64;
    }
    out
}

/// Errors unless every entry of `w` is finite.
pub fn check_finite(w: &[f64], what: &str) -> Result<()> {
    if w.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Errors unless `w` has exactly `expected` entries.
pub fn check_dim(w: &[f64], expected: usize) -> Result<()> {
    if w.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got: w.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        // 1 + 1e16 - 1e16 loses the 1 under naive left-to-right addition.
        let terms = [1.0, 1e16, -1e16];
        assert_eq!(compensated_sum(terms.iter().copied()), 1.0);
    }

    #[test]
    fn compensated_sum_is_order_independent_at_1e10() {
        let n = 10_000;
        let fwd: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64).powi(2)).collect();
        let mut rev = fwd.clone();
        rev.reverse();
        let a = compensated_sum(fwd.iter().copied());
        let b = compensated_sum(rev.iter().copied());
        assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn basic_ops() {
        let a = [3.0, 4.0];
        let b = [1.0, 1.0];
        assert_eq!(norm(&a), 5.0);
        assert_eq!(dist(&a, &b), (4.0f64 + 9.0).sqrt());
        assert_eq!(add_scaled(&a, 2.0, &b), vec![5.0, 6.0]);
        assert_eq!(mean_point(&[vec![0.0, 2.0], vec![2.0, 4.0]]), vec![1.0, 3.0]);
    }

    #[test]
    fn finite_check_rejects_nan() {
        assert!(check_finite(&[0.0, f64::NAN], "w").is_err());
        assert!(check_finite(&[0.0, 1.0], "w").is_ok());
    }
}
