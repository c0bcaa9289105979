//! Random-instance validation of the sum-of-norms Hessian: the closed form
//! must match central finite differences, and pair weights that favor
//! original-transformed couplings must not lower the minimum curvature.
//!
//! The minimum eigenvalue is computed by two independent routes (Jacobi or
//! power iteration, and a definiteness bisection) that must agree.

use augclust_core::analysis::fd_hessian;
use augclust_core::eigen::{min_eigenvalue, min_eigenvalue_bisect};
use augclust_core::error::{Error, Result};
use augclust_core::metric::Divergence;
use augclust_core::objective::Objective;
use augclust_core::sum_norms::{PairWeights, SumOfNorms};
use augclust_core::transforms::{alpha_pair_weights, apply_transform, Dataset, TransformSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::rows::ResultRow;

use super::mix_seed;

/// Relative agreement required between analytic and finite-difference
/// Hessians, on the max-abs scale of the analytic matrix.
pub(crate) const FD_REL_TOL: f64 = 1e-5;
/// Margin for the curvature ordering and for route agreement.
pub(crate) const ORDER_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-4;
const BISECT_TOL: f64 = 1e-11;

pub(crate) struct InstanceReport {
    pub fd_deviation: f64,
    pub fd_scale: f64,
    pub lambda_base: f64,
    pub lambda_aug: f64,
    pub lambda_base_alt: f64,
    pub lambda_aug_alt: f64,
}

impl InstanceReport {
    pub fn fd_ok(&self) -> bool {
        self.fd_deviation <= FD_REL_TOL * self.fd_scale
    }

    pub fn ordered(&self) -> bool {
        self.lambda_aug >= self.lambda_base - ORDER_TOL
    }

    pub fn ordered_alt(&self) -> bool {
        self.lambda_aug_alt >= self.lambda_base_alt - ORDER_TOL
    }

    pub fn routes_agree(&self) -> bool {
        (self.lambda_base - self.lambda_base_alt).abs() <= 1e-8
            && (self.lambda_aug - self.lambda_aug_alt).abs() <= 1e-8
    }
}

/// Builds one random instance (2 to 6 points, 1 to 3 coordinates) and checks
/// its augmented sum-of-norms objective.
pub(crate) fn run_instance(cfg: &ExperimentConfig, index: u64, seed: u64) -> Result<InstanceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(index.wrapping_mul(0x9E37), seed));
    let n = rng.gen_range(2..=6usize);
    let dim = rng.gen_range(1..=3usize);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();

    let variance = noise_variance(cfg);
    let data = Dataset::new(
        points.clone(),
        vec![0; n],
        vec![vec![0.0; dim]],
        Divergence::SquaredEuclidean,
    )?;
    let spec = TransformSpec::gaussian_noise(variance, mix_seed(cfg.transform.seed, seed))?;
    let transformed = apply_transform(&spec, &data)?;

    let mut all = points.clone();
    all.extend(transformed);
    let mut duplicated = points.clone();
    duplicated.extend(points);

    let obj = &cfg.objective;
    let base = SumOfNorms::new(
        duplicated,
        PairWeights::uniform(2 * n, obj.alpha1)?,
        obj.gamma,
    )?;
    let aug = SumOfNorms::new(all, alpha_pair_weights(n, obj.alpha1, obj.alpha2)?, obj.gamma)?;

    let d = aug.param_dim();
    let w0: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let analytic = aug
        .hessian(&w0)
        .ok_or_else(|| Error::InvalidParameter("objective has no Hessian".into()))?;
    let numeric = fd_hessian(|w| aug.grad(w), &w0, FD_STEP)?;

    let mut fd_deviation: f64 = 0.0;
    let mut fd_scale: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            fd_deviation = fd_deviation.max((analytic.get(i, j) - numeric.get(i, j)).abs());
            fd_scale = fd_scale.max(analytic.get(i, j).abs());
        }
    }

    let hb = base
        .hessian(&vec![0.0; base.param_dim()])
        .ok_or_else(|| Error::InvalidParameter("objective has no Hessian".into()))?;
    Ok(InstanceReport {
        fd_deviation,
        fd_scale,
        lambda_base: min_eigenvalue(&hb)?,
        lambda_aug: min_eigenvalue(&analytic)?,
        lambda_base_alt: min_eigenvalue_bisect(&hb, BISECT_TOL)?,
        lambda_aug_alt: min_eigenvalue_bisect(&analytic, BISECT_TOL)?,
    })
}

fn noise_variance(cfg: &ExperimentConfig) -> f64 {
    use augclust_core::transforms::TransformKind;
    match cfg.transform.kind {
        TransformKind::GaussianNoise { variance } => variance,
        _ => 1.0,
    }
}

pub(crate) fn run_cell(cfg: &ExperimentConfig, value: f64, seed: u64) -> Result<ResultRow> {
    let mut row = ResultRow::new(cfg.experiment.name(), seed, value);
    if value.fract() != 0.0 || value < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "instance indices must be nonnegative integers, got {value}"
        )));
    }
    let report = run_instance(cfg, value as u64, seed)?;
    row.final_distance = Some(report.fd_deviation);
    row.pass = report.fd_ok() && report.ordered() && report.routes_agree();
    row.aux_pass = Some(report.ordered_alt());
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn ten_random_instances_all_check_out() {
        let cfg = ExperimentConfig::default();
        for index in 0..10 {
            let r = run_instance(&cfg, index, 0).unwrap();
            assert!(r.fd_ok(), "instance {index}: fd deviation {}", r.fd_deviation);
            assert!(r.ordered(), "instance {index}");
            assert!(r.ordered_alt(), "instance {index}");
            assert!(r.routes_agree(), "instance {index}");
        }
    }
}
