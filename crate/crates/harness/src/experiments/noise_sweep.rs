//! Epochs-to-converge comparison between a duplicated dataset and a
//! noise-augmented one, swept over the noise variance.
//!
//! Both arms score the same candidate set under the soft-min loss and solve
//! for mixture weights on the probability simplex. At variance 0 the
//! augmented arm degenerates to an exact duplicate, so both arms are
//! bit-identical by construction.

use augclust_core::analysis::{epochs_to_converge, estimate_contraction};
use augclust_core::datagen::{build_comparison_pair, gen_clusters, GenSpec};
use augclust_core::error::Result;
use augclust_core::sets::DecisionSet;
use augclust_core::soft_min::SoftMin;
use augclust_core::transforms::{check_positive_supervision, TransformSpec};
use augclust_core::vector::dist;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::rows::ResultRow;

use super::{mix_seed, pick_candidates, solve_to_tolerance, START_STREAM};

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

    let obj = &cfg.objective;
    let candidates = pick_candidates(&data, obj.candidates_per_cluster)?;
    let base = SoftMin::new(&pair.baseline.points, &candidates, obj.beta, obj.divergence)?;
    let aug = SoftMin::new(&pair.augmented.points, &candidates, obj.beta, obj.divergence)?;

    let set = DecisionSet::simplex(candidates.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(START_STREAM, seed));
    let start = set.sample_uniform(&mut rng);

    let opt = &cfg.optimizer;
    let sol_base = solve_to_tolerance(&base, Some(&set), &start, opt.eta, opt.max_iters, opt.tol)?;
    let sol_aug = solve_to_tolerance(&aug, Some(&set), &start, opt.eta, opt.max_iters, opt.tol)?;

    let epochs_base = epochs_to_converge(&sol_base.trace, &sol_base.minimizer, cfg.epsilon)?;
    let epochs_aug = epochs_to_converge(&sol_aug.trace, &sol_aug.minimizer, cfg.epsilon)?;

    row.epochs_baseline = epochs_base.map(|e| e as u64);
    row.epochs_augmented = epochs_aug.map(|e| e as u64);
    row.fitted_rate_baseline = estimate_contraction(&sol_base.trace, &sol_base.minimizer, None)
        .ok()
        .map(|r| r.fitted_rate);
    row.fitted_rate_augmented = estimate_contraction(&sol_aug.trace, &sol_aug.minimizer, None)
        .ok()
        .map(|r| r.fitted_rate);
    row.final_distance = Some(dist(&sol_base.minimizer, &sol_aug.minimizer));
    row.grad_evals_baseline = Some(sol_base.trace.total_grad_evals() as u64);
    row.grad_evals_augmented = Some(sol_aug.trace.total_grad_evals() as u64);
    row.pass = epochs_base.is_some() && epochs_aug.is_some();
    row.aux_pass = Some(supervision.valid);
    Ok(row)
}
