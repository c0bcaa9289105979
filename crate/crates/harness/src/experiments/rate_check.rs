//! Linear-rate verification on a fixed grid of diagonal quadratics.
//!
//! Each sweep value indexes one cell of a 27-point grid over
//! (strong convexity mu, extra curvature kappa, smoothness multiplier).
//! The baseline instance has minimum curvature exactly `mu` and the
//! augmented instance adds an isotropic `kappa` term, so their per-step
//! squared-distance contractions must respect `1 - eta mu` and
//! `1 - eta (mu + kappa)` at step size `eta = 1/L`.

use augclust_core::analysis::{convergence_floor, estimate_contraction};
use augclust_core::error::{Error, Result};
use augclust_core::objective::{augment_unnormalized, Quadratic};
use augclust_core::optimizer::{grad_descent_obj, GDConfig, OptTrace};
use augclust_core::vector::dist;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::rows::ResultRow;

use super::mix_seed;

pub(crate) const MUS: [f64; 3] = [0.2, 0.5, 1.0];
pub(crate) const KAPPAS: [f64; 3] = [0.3, 1.0, 2.0];
pub(crate) const L_MULTS: [f64; 3] = [1.0, 2.0, 5.0];
pub(crate) const GRID_CELLS: usize = 27;

/// Per-step slack absorbing float rounding on exact quadratic contractions.
pub(crate) const STEP_SLACK: f64 = 1e-6;
const STEPS: usize = 60;

/// Decodes a grid cell index into its (mu, kappa, L) triple.
pub(crate) fn cell_params(index: usize) -> Result<(f64, f64, f64)> {
    if index >= GRID_CELLS {
        return Err(Error::InvalidParameter(format!(
            "grid cell index must be below {GRID_CELLS}, got {index}"
        )));
    }
    let mu = MUS[index / 9];
    let kappa = KAPPAS[(index / 3) % 3];
    let l = (mu + kappa) * L_MULTS[index % 3];
    Ok((mu, kappa, l))
}

/// Largest per-step squared-distance ratio along the trace, ignoring steps
/// that start at or below the numerical floor.
pub(crate) fn worst_step_ratio(trace: &OptTrace, w_star: &[f64]) -> Result<f64> {
    let d = trace.distances_to(w_star)?;
    let floor = convergence_floor(w_star);
    let mut worst: f64 = 0.0;
    for pair in d.windows(2) {
        if pair[0] > floor {
            worst = worst.max((pair[1] * pair[1]) / (pair[0] * pair[0]));
        }
    }
    Ok(worst)
}

pub(crate) struct CellReport {
    pub bound_base: f64,
    pub bound_aug: f64,
    pub worst_ratio_base: f64,
    pub worst_ratio_aug: f64,
    pub fitted_base: f64,
    pub fitted_aug: f64,
    pub final_distance: f64,
    pub grad_evals_base: u64,
    pub grad_evals_aug: u64,
}

impl CellReport {
    pub fn base_ok(&self) -> bool {
        self.worst_ratio_base <= self.bound_base + STEP_SLACK
    }

    pub fn aug_ok(&self) -> bool {
        self.worst_ratio_aug <= self.bound_aug + STEP_SLACK
    }
}

/// Runs one grid cell: paired descents on the baseline and augmented
/// quadratics from a common random start.
pub(crate) fn run_grid_cell(index: usize, seed: u64) -> Result<CellReport> {
    let (mu, kappa, l) = cell_params(index)?;
    let eta = 1.0 / l;

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(index as u64, seed));
    let center: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let offset: Vec<f64> = (0..2).map(|_| rng.gen_range(1.0..5.0)).collect();
    let start: Vec<f64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();

    let base = Quadratic::with_diag(center.clone(), vec![mu, l - kappa], 1)?;
    let extra = Quadratic::isotropic(center.clone(), kappa, 1)?;
    let aug = augment_unnormalized(base.clone(), extra)?;

    let gd = GDConfig::new(eta, STEPS)?;
    let (_, trace_base) = grad_descent_obj(&base, &start, &gd)?;
    let (w_aug, trace_aug) = grad_descent_obj(&aug, &start, &gd)?;

    let bound_base = 1.0 - eta * mu;
    let bound_aug = 1.0 - eta * (mu + kappa);
    let fit_base = estimate_contraction(&trace_base, &center, Some(bound_base))?;
    let fit_aug = estimate_contraction(&trace_aug, &center, Some(bound_aug))?;

    Ok(CellReport {
        bound_base,
        bound_aug,
        worst_ratio_base: worst_step_ratio(&trace_base, &center)?,
        worst_ratio_aug: worst_step_ratio(&trace_aug, &center)?,
        fitted_base: fit_base.fitted_rate,
        fitted_aug: fit_aug.fitted_rate,
        final_distance: dist(&w_aug, &center),
        grad_evals_base: trace_base.total_grad_evals() as u64,
        grad_evals_aug: trace_aug.total_grad_evals() as u64,
    })
}

pub(crate) fn run_cell(cfg: &ExperimentConfig, value: f64, seed: u64) -> Result<ResultRow> {
    let mut row = ResultRow::new(cfg.experiment.name(), seed, value);
    if value.fract() != 0.0 || value < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate-check sweep values are grid cell indices, got {value}"
        )));
    }
    let report = run_grid_cell(value as usize, seed)?;

    row.fitted_rate_baseline = Some(report.fitted_base);
    row.fitted_rate_augmented = Some(report.fitted_aug);
    row.final_distance = Some(report.final_distance);
    row.grad_evals_baseline = Some(report.grad_evals_base);
    row.grad_evals_augmented = Some(report.grad_evals_aug);
    row.pass = report.aug_ok() && report.fitted_aug <= report.bound_aug + STEP_SLACK;
    row.aux_pass = Some(report.base_ok());
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_decoding_covers_the_whole_grid() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..GRID_CELLS {
            let (mu, kappa, l) = cell_params(i).unwrap();
            assert!(l >= mu + kappa - 1e-12);
            assert!(l - kappa >= mu - 1e-12);
            seen.insert((mu.to_bits(), kappa.to_bits(), l.to_bits()));
        }
        assert_eq!(seen.len(), GRID_CELLS);
        assert!(cell_params(GRID_CELLS).is_err());
    }

    #[test]
    fn every_cell_contracts_within_its_bound() {
        for i in 0..GRID_CELLS {
            let r = run_grid_cell(i, 7).unwrap();
            assert!(r.aug_ok(), "cell {i}: {} > {}", r.worst_ratio_aug, r.bound_aug);
            assert!(r.base_ok(), "cell {i}: {} > {}", r.worst_ratio_base, r.bound_base);
            assert!(r.fitted_aug <= r.bound_aug + STEP_SLACK);
            assert!(r.fitted_base <= r.bound_base + STEP_SLACK);
        }
    }

    #[test]
    fn augmented_contracts_strictly_faster_on_the_slow_axis() {
        let r = run_grid_cell(4, 0).unwrap();
        assert!(r.worst_ratio_aug < r.worst_ratio_base);
    }
}
