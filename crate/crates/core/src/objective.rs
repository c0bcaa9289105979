//! Evaluable objective bundles and the weighted augmentation combinator.
//!
//! An [`Objective`] packages value, gradient, and optionally Hessian
//! evaluation together with the number of data points it averages over.
//! [`augment`] combines a base objective with a transform component as the
//! point-count-weighted average of the two per-point averages, so adding a
//! component with zero points leaves the base objective bit-identical.

use crate::eigen::SymMatrix;
use crate::vector::{check_dim, check_finite};
use crate::{Error, Result};

pub trait Objective: Send + Sync {
    fn value(&self, w: &[f64]) -> Result<f64>;
    fn grad(&self, w: &[f64]) -> Result<Vec<f64>>;
    /// Hessian at `w`, if available in closed form.
    fn hessian(&self, _w: &[f64]) -> Option<SymMatrix> {
        None
    }
    /// Number of data points the objective averages or sums over.
    fn n_points(&self) -> usize;
    fn param_dim(&self) -> usize;
}

/// Diagonal quadratic `0.5 * sum_k curvature_k (w_k - center_k)^2`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    center: Vec<f64>,
    curvature: Vec<f64>,
    n_points: usize,
}

impl Quadratic {
    pub fn isotropic(center: Vec<f64>, curvature: f64, n_points: usize) -> Result<Self> {
        let d = center.len();
        Self::with_diag(center, vec![curvature; d], n_points)
    }

    pub fn with_diag(center: Vec<f64>, curvature: Vec<f64>, n_points: usize) -> Result<Self> {
        check_finite(&center, "quadratic center")?;
        check_finite(&curvature, "quadratic curvature")?;
        if center.len() != curvature.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: curvature.len(),
            });
        }
        if center.is_empty() {
            return Err(Error::InvalidParameter("quadratic needs dim >= 1".into()));
        }
        Ok(Self {
            center,
            curvature,
            n_points,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

impl Objective for Quadratic {
    fn value(&self, w: &[f64]) -> Result<f64> {
        check_dim(w, self.center.len())?;
        let mut acc = 0.0;
        for ((x, c), d) in w.iter().zip(&self.center).zip(&self.curvature) {
            acc += 0.5 * d * (x - c) * (x - c);
        }
        Ok(acc)
    }

    fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(w, self.center.len())?;
        Ok(w.iter()
            .zip(&self.center)
            .zip(&self.curvature)
            .map(|((x, c), d)| d * (x - c))
            .collect())
    }

    fn hessian(&self, _w: &[f64]) -> Option<SymMatrix> {
        let mut h = SymMatrix::zeros(self.center.len());
        for (i, d) in self.curvature.iter().enumerate() {
            h.set(i, i, *d);
        }
        Some(h)
    }

    fn n_points(&self) -> usize {
        self.n_points
    }

    fn param_dim(&self) -> usize {
        self.center.len()
    }
}

/// Quadratic bowl with a sinusoidal ripple in every coordinate:
/// `0.5 ||w - center||^2 + amplitude * sum_k sin(frequency * w_k)`.
///
/// With `amplitude * frequency^2 > 1` the ripple overpowers the bowl's
/// curvature in places and the landscape has many local minima, while the
/// quadratic envelope keeps a unique global minimum near `center`.
#[derive(Debug, Clone)]
pub struct PerturbedQuadratic {
    center: Vec<f64>,
    amplitude: f64,
    frequency: f64,
    n_points: usize,
}

impl PerturbedQuadratic {
    pub fn new(center: Vec<f64>, amplitude: f64, frequency: f64, n_points: usize) -> Result<Self> {
        check_finite(&center, "perturbed quadratic center")?;
        if center.is_empty() {
            return Err(Error::InvalidParameter("center needs dim >= 1".into()));
        }
        if !(amplitude.is_finite() && frequency.is_finite() && amplitude >= 0.0 && frequency >= 0.0)
        {
            return Err(Error::InvalidParameter(
                "amplitude and frequency must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            center,
            amplitude,
            frequency,
            n_points,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Global minimizer over an axis-aligned box, exploiting separability:
    /// each coordinate is scanned on a dense grid, then the stationary point
    /// is polished by bisecting the derivative inside the best grid cell.
    pub fn global_minimum(&self, lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
        check_dim(lo, self.center.len())?;
        check_dim(hi, self.center.len())?;
        check_finite(lo, "box lower corner")?;
        check_finite(hi, "box upper corner")?;
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidParameter(
                "box lower corner exceeds upper corner".into(),
            ));
        }
        lo.iter()
            .zip(hi)
            .zip(&self.center)
            .map(|((&a, &b), &c)| self.minimize_coordinate(a, b, c))
            .collect()
    }

    fn minimize_coordinate(&self, lo: f64, hi: f64, c: f64) -> Result<f64> {
        let g = |t: f64| 0.5 * (t - c) * (t - c) + self.amplitude * (self.frequency * t).sin();
        let dg = |t: f64| (t - c) + self.amplitude * self.frequency * (self.frequency * t).cos();
        if hi == lo {
            return Ok(lo);
        }
        // At least 64 samples per ripple period so no basin is skipped.
        let periods = (hi - lo) * self.frequency / (2.0 * std::f64::consts::PI);
        let cells = ((periods * 64.0).ceil() as usize).clamp(2000, 200_000);
        let step = (hi - lo) / cells as f64;
        let mut best_i = 0;
        let mut best_v = f64::INFINITY;
        for i in 0..=cells {
            let v = g(lo + step * i as f64);
            if v < best_v {
                best_v = v;
                best_i = i;
            }
        }
        let mut a = (lo + step * (best_i.saturating_sub(1)) as f64).max(lo);
        let mut b = (lo + step * (best_i + 1) as f64).min(hi);
        let mut t = lo + step * best_i as f64;
        if dg(a) < 0.0 && dg(b) > 0.0 {
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if dg(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            t = 0.5 * (a + b);
        }
        // The boundary can undercut the polished interior point.
        let winner = [t, lo, hi]
            .into_iter()
            .min_by(|x, y| g(*x).partial_cmp(&g(*y)).unwrap())
            .unwrap();
        Ok(winner)
    }
}

impl Objective for PerturbedQuadratic {
    fn value(&self, w: &[f64]) -> Result<f64> {
        check_dim(w, self.center.len())?;
        let mut acc = 0.0;
        for (x, c) in w.iter().zip(&self.center) {
            acc += 0.5 * (x - c) * (x - c) + self.amplitude * (self.frequency * x).sin();
        }
        Ok(acc)
    }

    fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(w, self.center.len())?;
        Ok(w.iter()
            .zip(&self.center)
            .map(|(x, c)| (x - c) + self.amplitude * self.frequency * (self.frequency * x).cos())
            .collect())
    }

    fn hessian(&self, w: &[f64]) -> Option<SymMatrix> {
        let mut h = SymMatrix::zeros(self.center.len());
        for (i, x) in w.iter().enumerate() {
            let s = 1.0 - self.amplitude * self.frequency * self.frequency * (self.frequency * x).sin();
            h.set(i, i, s);
        }
        Some(h)
    }

    fn n_points(&self) -> usize {
        self.n_points
    }

    fn param_dim(&self) -> usize {
        self.center.len()
    }
}

/// Weighted combination of a base objective with a transform component.
#[derive(Debug, Clone)]
pub struct Augmented<F, G> {
    base: F,
    transform: G,
    base_weight: f64,
    transform_weight: f64,
    n_points: usize,
}

impl<F: Objective, G: Objective> Augmented<F, G> {
    pub fn weights(&self) -> (f64, f64) {
        (self.base_weight, self.transform_weight)
    }
}

fn combine<F: Objective, G: Objective>(
    base: F,
    transform: G,
    base_weight: f64,
    transform_weight: f64,
) -> Result<Augmented<F, G>> {
    if base.param_dim() != transform.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: base.param_dim(),
            got: transform.param_dim(),
        });
    }
    let n_points = base.n_points() + transform.n_points();
    if n_points == 0 {
        return Err(Error::InvalidParameter(
            "augmented objective needs at least one point".into(),
        ));
    }
    Ok(Augmented {
        base,
        transform,
        base_weight,
        transform_weight,
        n_points,
    })
}

/// Point-count-weighted average `(N f + N' g) / (N + N')` of two per-point
/// average objectives over the same parameters.
pub fn augment<F: Objective, G: Objective>(base: F, transform: G) -> Result<Augmented<F, G>> {
    let n = base.n_points() as f64;
    let np = transform.n_points() as f64;
    let total = n + np;
    if total == 0.0 {
        return Err(Error::InvalidParameter(
            "augmented objective needs at least one point".into(),
        ));
    }
    combine(base, transform, n / total, np / total)
}

/// Plain sum `f + g`. With a mu-strongly-convex base and a kappa-strongly
/// convex transform component the sum is exactly (mu + kappa)-strongly
/// convex, which the normalized average dilutes to the weighted mean.
pub fn augment_unnormalized<F: Objective, G: Objective>(
    base: F,
    transform: G,
) -> Result<Augmented<F, G>> {
    combine(base, transform, 1.0, 1.0)
}

impl<F: Objective, G: Objective> Objective for Augmented<F, G> {
    fn value(&self, w: &[f64]) -> Result<f64> {
        // Zero-weight components are skipped entirely so the degenerate
        // combination stays bit-identical to the surviving component.
        let mut acc = 0.0;
        if self.base_weight != 0.0 {
            acc += self.base_weight * self.base.value(w)?;
        }
        if self.transform_weight != 0.0 {
            acc += self.transform_weight * self.transform.value(w)?;
        }
        Ok(acc)
    }

    fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        if self.transform_weight == 0.0 {
            let mut g = self.base.grad(w)?;
            if self.base_weight != 1.0 {
                g.iter_mut().for_each(|x| *x *= self.base_weight);
            }
            return Ok(g);
        }
        if self.base_weight == 0.0 {
            let mut g = self.transform.grad(w)?;
            if self.transform_weight != 1.0 {
                g.iter_mut().for_each(|x| *x *= self.transform_weight);
            }
            return Ok(g);
        }
        let gf = self.base.grad(w)?;
        let gg = self.transform.grad(w)?;
        Ok(gf
            .iter()
            .zip(&gg)
            .map(|(a, b)| self.base_weight * a + self.transform_weight * b)
            .collect())
    }

    fn hessian(&self, w: &[f64]) -> Option<SymMatrix> {
        let hf = self.base.hessian(w)?;
        let hg = self.transform.hessian(w)?;
        hf.add_scaled(self.base_weight, &hg, self.transform_weight).ok()
    }

    fn n_points(&self) -> usize {
        self.n_points
    }

    fn param_dim(&self) -> usize {
        self.base.param_dim()
    }
}
