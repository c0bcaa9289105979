//! Graduated descent on a rippled quadratic, baseline versus an arm with
//! extra isotropic curvature at the optimum, with paired seeds.
//!
//! The sweep value is the extra curvature. Both arms share the same global
//! minimizer by construction, so the comparison isolates how curvature
//! changes the per-phase iteration budget and total gradient cost.

use augclust_core::analysis::epochs_to_converge;
use augclust_core::error::{Error, Result};
use augclust_core::objective::{augment_unnormalized, Objective, PerturbedQuadratic, Quadratic};
use augclust_core::optimizer::{graduated_descent, GraduatedConfig, OptTrace};
use augclust_core::sets::{DecisionSet, Projector};
use augclust_core::vector::{dist, mean_point};

use crate::config::ExperimentConfig;
use crate::rows::ResultRow;

use super::phase_log_slope;

pub(crate) struct Family {
    pub objective: PerturbedQuadratic,
    pub set: DecisionSet,
    pub w_star: Vec<f64>,
}

/// Builds the rippled-quadratic family centered at the mean of the
/// configured centroids, boxed to twice the center, with the box-wide
/// grid-search optimum.
pub(crate) fn build_family(cfg: &ExperimentConfig) -> Result<Family> {
    let center = mean_point(&cfg.gen.centroids);
    if center.is_empty() {
        return Err(Error::InvalidParameter(
            "family center needs at least one centroid".into(),
        ));
    }
    let lo = vec![0.0; center.len()];
    let hi: Vec<f64> = center.iter().map(|c| 2.0 * c).collect();
    let objective = PerturbedQuadratic::new(
        center,
        cfg.objective.amplitude,
        cfg.objective.frequency,
        1,
    )?;
    let w_star = objective.global_minimum(&lo, &hi)?;
    let set = DecisionSet::axis_box(lo, hi)?;
    Ok(Family {
        objective,
        set,
        w_star,
    })
}

pub(crate) fn schedule(cfg: &ExperimentConfig, mu_kappa: f64, seed: u64) -> Result<GraduatedConfig> {
    let opt = &cfg.optimizer;
    let mut g = GraduatedConfig::new(opt.phases, opt.eta, mu_kappa, opt.samples, seed)?
        .with_shrink(opt.shrink)?
        .with_t_cap(opt.t_cap)?;
    if opt.delta1 > 0.0 {
        g = g.with_delta1(opt.delta1)?;
    }
    Ok(g)
}

pub(crate) struct ArmOutcome {
    pub final_distance: f64,
    pub epochs: Option<usize>,
    pub evals: Option<usize>,
    pub total_evals: usize,
    pub rate: Option<f64>,
    pub contained: bool,
}

pub(crate) fn run_arm(
    objective: &dyn Objective,
    family: &Family,
    gcfg: &GraduatedConfig,
    epsilon: f64,
) -> Result<(ArmOutcome, OptTrace)> {
    let (w, trace) = graduated_descent(objective, &family.set, gcfg)?;
    let final_distance = dist(&w, &family.w_star);
    let target = gcfg.final_delta(family.set.diameter());
    Ok((
        ArmOutcome {
            final_distance,
            epochs: epochs_to_converge(&trace, &family.w_star, epsilon)?,
            evals: trace.grad_evals_to_reach(&family.w_star, epsilon)?,
            total_evals: trace.total_grad_evals(),
            rate: phase_log_slope(&trace, &family.w_star)?.map(f64::exp),
            contained: final_distance <= target,
        },
        trace,
    ))
}

pub(crate) fn run_cell(cfg: &ExperimentConfig, kappa: f64, seed: u64) -> Result<ResultRow> {
    let mut row = ResultRow::new(cfg.experiment.name(), seed, kappa);
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "extra curvature must be nonnegative, got {kappa}"
        )));
    }
    let family = build_family(cfg)?;
    let mu = cfg.optimizer.mu;

    let base_cfg = schedule(cfg, mu, seed)?;
    let aug_cfg = schedule(cfg, mu + kappa, seed)?;
    let extra = Quadratic::isotropic(family.w_star.clone(), kappa, 1)?;
    let augmented = augment_unnormalized(family.objective.clone(), extra)?;

    let (base, _) = run_arm(&family.objective, &family, &base_cfg, cfg.epsilon)?;
    let (aug, _) = run_arm(&augmented, &family, &aug_cfg, cfg.epsilon)?;

    row.epochs_baseline = base.epochs.map(|e| e as u64);
    row.epochs_augmented = aug.epochs.map(|e| e as u64);
    row.fitted_rate_baseline = base.rate;
    row.fitted_rate_augmented = aug.rate;
    row.final_distance = Some(base.final_distance.max(aug.final_distance));
    row.grad_evals_baseline = Some(base.evals.unwrap_or(base.total_evals) as u64);
    row.grad_evals_augmented = Some(aug.evals.unwrap_or(aug.total_evals) as u64);
    row.pass = match (base.evals, aug.evals) {
        (Some(b), Some(a)) => a < b,
        _ => false,
    };
    row.aux_pass = Some(base.contained && aug.contained);
    Ok(row)
}
