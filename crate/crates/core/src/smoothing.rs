//! Ball smoothing and the Monte-Carlo smoothed gradient operator.
//!
//! The smoothed objective averages `f` over a radius-`delta` ball around the
//! query point. Both the value and gradient estimators draw their ball
//! points from a counter-indexed generator: sample `s` depends only on
//! `(seed, s)`, never on evaluation order, so repeated calls with the same
//! parameters are bit-identical and two objectives smoothed with the same
//! seed see the same perturbations (common random numbers).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::objective::Objective;
use crate::vector::{check_dim, check_finite, CompensatedSum};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
}

impl SmoothingParams {
    pub fn new(delta: f64, samples: usize, seed: u64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smoothing radius must be finite and nonnegative, got {delta}"
            )));
        }
        if samples == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        Ok(Self {
            delta,
            samples,
            seed,
        })
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Uniform draw from the unit ball: Gaussian direction scaled by a
/// `U^(1/d)` radius.
pub fn sample_unit_ball(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(dim >= 1, "ball sampling needs dim >= 1");
    let mut dir: Vec<f64>;
    let mut norm_sq: f64;
    loop {
        dir = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        norm_sq = dir.iter().map(|x| x * x).sum();
        if norm_sq > 1e-300 {
            break;
        }
    }
    let radius: f64 = rng.gen::<f64>().powf(1.0 / dim as f64);
    let scale = radius / norm_sq.sqrt();
    dir.iter_mut().for_each(|x| *x *= scale);
    dir
}

/// Ball sample number `index` of the stream identified by `seed`,
/// independent of every other index.
pub fn ball_point(dim: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    sample_unit_ball(dim, &mut rng)
}

fn perturbed(w: &[f64], delta: f64, u: &[f64]) -> Vec<f64> {
    w.iter().zip(u).map(|(x, v)| x + delta * v).collect()
}

/// Monte-Carlo mean of `f` over the delta-ball around `w`. A zero radius
/// returns the exact value with zero reported error.
pub fn smoothed_value(f: &dyn Objective, w: &[f64], p: &SmoothingParams) -> Result<Estimate> {
    check_dim(w, f.param_dim())?;
    check_finite(w, "evaluation point")?;
    if p.delta == 0.0 {
        return Ok(Estimate {
            mean: f.value(w)?,
            std_error: 0.0,
        });
    }
    let mut samples = Vec::with_capacity(p.samples);
    for s in 0..p.samples {
        let u = ball_point(w.len(), p.seed, s as u64);
        let v = f.value(&perturbed(w, p.delta, &u))?;
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { draw: s });
        }
        samples.push(v);
    }
    let mut acc = CompensatedSum::new();
    for &v in &samples {
        acc.add(v);
    }
    let mean = acc.value() / p.samples as f64;
    let std_error = if p.samples > 1 {
        let var: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (p.samples - 1) as f64;
        (var / p.samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { mean, std_error })
}

/// Smoothed gradient operator: the average of true gradients at ball-
/// perturbed points. A zero radius returns the exact gradient. Pure
/// function of `(w, seed, samples)`.
pub fn grad_op(f: &dyn Objective, w: &[f64], p: &SmoothingParams) -> Result<Vec<f64>> {
    check_dim(w, f.param_dim())?;
    check_finite(w, "evaluation point")?;
    if p.delta == 0.0 {
        return f.grad(w);
    }
    let dim = w.len();
    let mut acc: Vec<CompensatedSum> = (0..dim).map(|_| CompensatedSum::new()).collect();
    for s in 0..p.samples {
        let u = ball_point(dim, p.seed, s as u64);
        let g = f.grad(&perturbed(w, p.delta, &u))?;
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { draw: s });
        }
        for (a, x) in acc.iter_mut().zip(&g) {
            a.add(*x);
        }
    }
    let inv = 1.0 / p.samples as f64;
    Ok(acc.iter().map(|a| a.value() * inv).collect())
}

/// Gradient oracle pairing an objective with smoothing parameters.
///
/// `grad` is the Monte-Carlo smoothed operator; `value` passes through to
/// the unsmoothed objective so traces record the quantity being minimized.
#[derive(Clone, Copy)]
pub struct SmoothedOracle<'a> {
    pub objective: &'a dyn Objective,
    pub params: SmoothingParams,
}

impl<'a> SmoothedOracle<'a> {
    pub fn new(objective: &'a dyn Objective, params: SmoothingParams) -> Self {
        Self { objective, params }
    }

    pub fn smoothed_grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        grad_op(self.objective, w, &self.params)
    }

    /// Gradient evaluations of the underlying objective per oracle call.
    pub fn gradient_cost(&self) -> usize {
        if self.params.delta == 0.0 {
            1
        } else {
            self.params.samples
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Quadratic;
    use crate::vector::norm;

    struct Linear {
        a: Vec<f64>,
    }

    impl Objective for Linear {
        fn value(&self, w: &[f64]) -> Result<f64> {
            Ok(self.a.iter().zip(w).map(|(a, x)| a * x).sum())
        }
        fn grad(&self, _w: &[f64]) -> Result<Vec<f64>> {
            Ok(self.a.clone())
        }
        fn n_points(&self) -> usize {
            1
        }
        fn param_dim(&self) -> usize {
            self.a.len()
        }
    }

    struct Constant {
        c: f64,
        dim: usize,
    }

    impl Objective for Constant {
        fn value(&self, _w: &[f64]) -> Result<f64> {
            Ok(self.c)
        }
        fn grad(&self, _w: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![0.0; self.dim])
        }
        fn n_points(&self) -> usize {
            1
        }
        fn param_dim(&self) -> usize {
            self.dim
        }
    }

    #[test]
    fn one_dimensional_samples_stay_in_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let v = sample_unit_ball(1, &mut rng);
            assert!(v[0] >= -1.0 && v[0] <= 1.0);
        }
    }

    #[test]
    fn samples_never_leave_the_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [1, 2, 3, 7] {
            for _ in 0..500 {
                let v = sample_unit_ball(d, &mut rng);
                assert!(norm(&v) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn empirical_mean_is_near_origin() {
        let n = 100_000;
        let mut sums = [0.0f64; 2];
        for s in 0..n {
            let v = ball_point(2, 42, s);
            sums[0] += v[0];
            sums[1] += v[1];
        }
        // Per-coordinate variance of the 2-ball is 1/(d+2) = 1/4.
        let bound = 4.0 * 0.5 / (n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64).abs() < bound);
        }
    }

    #[test]
    fn empirical_second_moment_matches_analytic() {
        let n = 100_000;
        let mut sum = 0.0;
        for s in 0..n {
            let v = ball_point(3, 7, s);
            sum += v.iter().map(|x| x * x).sum::<f64>();
        }
        let mean = sum / n as f64;
        // E||u||^2 = d/(d+2) = 0.6 for the 3-ball.
        assert!((mean - 0.6).abs() < 0.006, "second moment {mean}");
    }

    #[test]
    fn counter_indexing_is_order_independent() {
        let a = ball_point(4, 9, 5);
        let _ = ball_point(4, 9, 0);
        let b = ball_point(4, 9, 5);
        assert_eq!(a, b);
        assert_ne!(ball_point(4, 9, 5), ball_point(4, 10, 5));
        assert_ne!(ball_point(4, 9, 5), ball_point(4, 9, 6));
    }

    #[test]
    fn constant_objective_has_zero_error() {
        let f = Constant { c: 3.5, dim: 2 };
        let p = SmoothingParams::new(1.0, 100, 0).unwrap();
        let e = smoothed_value(&f, &[0.0, 0.0], &p).unwrap();
        assert_eq!(e.mean, 3.5);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn linear_objective_mean_converges_to_value() {
        let f = Linear { a: vec![2.0, -1.0] };
        let w = [1.0, 3.0];
        let p = SmoothingParams::new(0.8, 10_000, 3).unwrap();
        let e = smoothed_value(&f, &w, &p).unwrap();
        assert!(e.std_error > 0.0);
        assert!((e.mean - (-1.0)).abs() < 4.0 * e.std_error);
    }

    #[test]
    fn quadratic_smoothed_value_gains_the_moment_term() {
        // E||delta u||^2 = delta^2 d/(d+2) = 0.5 at delta=1, d=2.
        let f = Quadratic::isotropic(vec![0.0, 0.0], 2.0, 1).unwrap();
        let p = SmoothingParams::new(1.0, 10_000, 11).unwrap();
        let e = smoothed_value(&f, &[0.0, 0.0], &p).unwrap();
        assert!((e.mean - 0.5).abs() < 4.0 * e.std_error, "mean {}", e.mean);
    }

    #[test]
    fn zero_radius_is_exact() {
        let f = Quadratic::isotropic(vec![1.0, -2.0], 3.0, 1).unwrap();
        let p = SmoothingParams::new(0.0, 64, 5).unwrap();
        let w = [0.25, 0.75];
        assert_eq!(smoothed_value(&f, &w, &p).unwrap().mean, f.value(&w).unwrap());
        assert_eq!(grad_op(&f, &w, &p).unwrap(), f.grad(&w).unwrap());
    }

    #[test]
    fn linear_gradient_is_exact_for_any_radius() {
        let f = Linear { a: vec![2.0, -1.0, 0.5] };
        let w = [0.0, 0.0, 0.0];
        let p = SmoothingParams::new(2.0, 64, 8).unwrap();
        assert_eq!(grad_op(&f, &w, &p).unwrap(), vec![2.0, -1.0, 0.5]);
        let odd = SmoothingParams::new(2.0, 37, 8).unwrap();
        let g = grad_op(&f, &w, &odd).unwrap();
        for (got, want) in g.iter().zip([2.0, -1.0, 0.5]) {
            assert!((got - want).abs() <= 1e-15 * want.abs());
        }
    }

    #[test]
    fn quadratic_gradient_estimate_is_unbiased() {
        let f = Quadratic::isotropic(vec![0.0, 0.0], 2.0, 1).unwrap();
        let w = [1.0, 1.0];
        let delta = 0.5;
        let samples = 10_000;
        let p = SmoothingParams::new(delta, samples, 13).unwrap();
        let g = grad_op(&f, &w, &p).unwrap();
        // Sample gradient is 2(w + delta u); its standard error follows
        // from the per-coordinate ball variance 1/(d+2).
        let se = 2.0 * delta * 0.5 / (samples as f64).sqrt();
        for got in g {
            assert!((got - 2.0).abs() < 4.0 * se, "component {got}");
        }
    }

    #[test]
    fn grad_op_is_a_pure_function_of_its_inputs() {
        let f = Quadratic::isotropic(vec![3.0, 4.0], 1.0, 1).unwrap();
        let p = SmoothingParams::new(0.7, 33, 21).unwrap();
        let w = [0.5, -0.5];
        let a = grad_op(&f, &w, &p).unwrap();
        let _ = grad_op(&f, &[9.0, 9.0], &p).unwrap();
        let b = grad_op(&f, &w, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_samples_name_the_draw() {
        struct Spiky;
        impl Objective for Spiky {
            fn value(&self, w: &[f64]) -> Result<f64> {
                Ok(1.0 / w[0])
            }
            fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![(1.0 - w[0]).ln()])
            }
            fn n_points(&self) -> usize {
                1
            }
            fn param_dim(&self) -> usize {
                1
            }
        }
        // Perturbations past w = 1 make the gradient NaN.
        let p = SmoothingParams::new(1.0, 64, 2).unwrap();
        let err = grad_op(&Spiky, &[0.9], &p).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSample { .. }));
    }

    #[test]
    fn parameter_validation() {
        assert!(SmoothingParams::new(-0.1, 10, 0).is_err());
        assert!(SmoothingParams::new(1.0, 0, 0).is_err());
        assert!(SmoothingParams::new(f64::NAN, 10, 0).is_err());
    }
}
