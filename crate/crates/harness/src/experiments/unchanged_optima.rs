//! Paired-minimizer agreement between the duplicated and noise-augmented
//! arms, for both supported losses, swept over the noise variance.
//!
//! The pass bound is a fixed fraction of the coordinate scale: mixture
//! weights live on the simplex (scale 1), while consensus positions live on
//! the data's own scale.

use augclust_core::analysis::{verify_unchanged_optima, SolverConfig};
use augclust_core::datagen::{build_comparison_pair, gen_clusters, GenSpec};
use augclust_core::error::Result;
use augclust_core::sets::DecisionSet;
use augclust_core::soft_min::SoftMin;
use augclust_core::sum_norms::SumOfNorms;
use augclust_core::transforms::{alpha_pair_weights, check_positive_supervision, TransformSpec};

use crate::config::{ExperimentConfig, LossKind};
use crate::rows::ResultRow;

use super::{mix_seed, pick_candidates, rms_diff, solve_to_tolerance, START_STREAM};

/// Pass bound as a fraction of the parameter coordinate scale.
pub(crate) const AGREEMENT_FRACTION: f64 = 1e-3;

pub(crate) fn run_cell(cfg: &ExperimentConfig, variance: f64, seed: u64) -> Result<ResultRow> {
    let mut row = ResultRow::new(cfg.experiment.name(), seed, variance);

    let gen = GenSpec {
        seed: mix_seed(cfg.gen.seed, seed),
        ..cfg.gen.clone()
    };
    let data = gen_clusters(&gen)?;
    let spec = if variance == 0.0 {
        TransformSpec::duplicate()
    } else {
        TransformSpec::gaussian_noise(variance, mix_seed(cfg.transform.seed, seed))?
    };
    let pair = build_comparison_pair(&data, &spec)?;
    let n = pair.n_original;
    let supervision = check_positive_supervision(&data, &pair.augmented.points[n..])?;
    row.aux_pass = Some(supervision.valid);

    let obj = &cfg.objective;
    let opt = &cfg.optimizer;
    match obj.loss {
        LossKind::SoftMin => {
            let candidates = pick_candidates(&data, obj.candidates_per_cluster)?;
            let base =
                SoftMin::new(&pair.baseline.points, &candidates, obj.beta, obj.divergence)?;
            let aug =
                SoftMin::new(&pair.augmented.points, &candidates, obj.beta, obj.divergence)?;
            let set = DecisionSet::simplex(candidates.len())?;
            let solver = SolverConfig::new(
                opt.eta,
                opt.max_iters,
                opt.tol,
                AGREEMENT_FRACTION,
                mix_seed(START_STREAM, seed),
            )?;
            let report = verify_unchanged_optima(&base, &aug, &set, &solver)?;
            row.final_distance = Some(report.distance);
            row.pass = report.pass;
        }
        LossKind::SumOfNorms => {
            let weights = alpha_pair_weights(n, obj.alpha1, obj.alpha2)?;
            let base = SumOfNorms::new(pair.baseline.points.clone(), weights.clone(), obj.gamma)?;
            let aug = SumOfNorms::new(pair.augmented.points.clone(), weights, obj.gamma)?;

            let flatten =
                |pts: &[Vec<f64>]| pts.iter().flatten().copied().collect::<Vec<f64>>();
            let sol_base = solve_to_tolerance(
                &base,
                None,
                &flatten(&pair.baseline.points),
                opt.eta,
                opt.max_iters,
                opt.tol,
            )?;
            let sol_aug = solve_to_tolerance(
                &aug,
                None,
                &flatten(&pair.augmented.points),
                opt.eta,
                opt.max_iters,
                opt.tol,
            )?;

            // Only the consensus positions of the original points are
            // comparable across arms; the trailing block belongs to
            // different copies.
            let block = n * base.point_dim();
            let rms = rms_diff(
                &sol_base.minimizer[..block],
                &sol_aug.minimizer[..block],
            );
            let scale = data
                .points
                .iter()
                .flatten()
                .fold(1.0_f64, |m, x| m.max(x.abs()));
            row.final_distance = Some(rms);
            row.grad_evals_baseline = Some(sol_base.trace.total_grad_evals() as u64);
            row.grad_evals_augmented = Some(sol_aug.trace.total_grad_evals() as u64);
            row.pass = rms <= AGREEMENT_FRACTION * scale;
        }
    }
    Ok(row)
}
