//! Trace post-processing: contraction-rate fits, epoch counts, paired
//! optimum checks, and curvature probes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eigen::{min_eigenvalue, SymMatrix};
use crate::objective::Objective;
use crate::optimizer::{grad_descent_obj, GDConfig, OptTrace, StopRule};
use crate::sets::{DecisionSet, Projector};
use crate::sum_norms::SumOfNorms;
use crate::vector::{check_finite, dist, norm};
use crate::{Error, Result};

/// Slack added to the theoretical bound when judging a fitted rate.
pub const RATE_FIT_SLACK: f64 = 1e-6;
/// Slack allowed when comparing minimum eigenvalues of paired Hessians.
pub const SPECTRAL_ORDER_TOL: f64 = 1e-10;

/// Distances below this are treated as numerically converged and excluded
/// from rate fits.
pub fn convergence_floor(w_star: &[f64]) -> f64 {
    100.0 * f64::EPSILON * norm(w_star).max(1.0)
}

/// Least-squares fit of the per-step squared-distance contraction.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// `exp(slope)` of the `log ||w_t - w*||^2` vs `t` regression.
    pub fitted_rate: f64,
    pub r_squared: f64,
    /// Theoretical per-step contraction the fit is judged against.
    pub bound: Option<f64>,
    /// False only when a bound is given and the fit exceeds it.
    pub satisfied: bool,
    /// True when the trace reached the floating-point floor early, so the
    /// fit covers only the leading prefix.
    pub degenerate_tail: bool,
}

/// Fits `log ||w_t - w*||^2` against `t` over the prefix of iterations that
/// stay above the numerical convergence floor.
pub fn estimate_contraction(
    trace: &OptTrace,
    w_star: &[f64],
    bound: Option<f64>,
) -> Result<RateReport> {
    if trace.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs at least 3 iterates, got {}",
            trace.len()
        )));
    }
    if let Some(b) = bound {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rate bound must be nonnegative, got {b}"
            )));
        }
    }
    let d = trace.distances_to(w_star)?;
    let floor = convergence_floor(w_star);
    if d[0] <= floor {
        return Err(Error::DegenerateTrace(
            "trace starts at the reference point, no rate to fit".into(),
        ));
    }
    let n_use = d.iter().position(|x| *x <= floor).unwrap_or(d.len());
    let degenerate_tail = n_use < d.len();

    let (fitted_rate, r_squared) = if n_use == 1 {
        // The very first step landed on the floor: contraction is total.
        (0.0, 1.0)
    } else {
        let ys: Vec<f64> = d[..n_use].iter().map(|x| 2.0 * x.ln()).collect();
        let t_mean = (n_use as f64 - 1.0) / 2.0;
        let y_mean = ys.iter().sum::<f64>() / n_use as f64;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut syy = 0.0;
        for (t, y) in ys.iter().enumerate() {
            let dt = t as f64 - t_mean;
            let dy = y - y_mean;
            sxx += dt * dt;
            sxy += dt * dy;
            syy += dy * dy;
        }
        let slope = sxy / sxx;
        let r2 = if syy <= 1e-24 {
            1.0
        } else {
            (sxy * sxy) / (sxx * syy)
        };
        (slope.exp(), r2)
    };

    Ok(RateReport {
        fitted_rate,
        r_squared,
        bound,
        satisfied: bound.map_or(true, |b| fitted_rate <= b + RATE_FIT_SLACK),
        degenerate_tail,
    })
}

/// Index of the first iterate within `epsilon` of `w_star`, if any. Index 0
/// means the trace already started converged.
pub fn epochs_to_converge(
    trace: &OptTrace,
    w_star: &[f64],
    epsilon: f64,
) -> Result<Option<usize>> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "convergence threshold must be positive, got {epsilon}"
        )));
    }
    let d = trace.distances_to(w_star)?;
    Ok(d.iter().position(|x| *x <= epsilon))
}

/// Settings for the paired solves of [`verify_unchanged_optima`].
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub eta: f64,
    pub max_iters: usize,
    /// Residual tolerance on the final projected step per unit step size.
    pub tol: f64,
    /// Minimizer-distance bound that decides the pass flag.
    pub bound: f64,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(eta: f64, max_iters: usize, tol: f64, bound: f64, seed: u64) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {eta}"
            )));
        }
        if max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "residual tolerance must be positive, got {tol}"
            )));
        }
        if !bound.is_finite() || bound < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "distance bound must be nonnegative, got {bound}"
            )));
        }
        Ok(Self {
            eta,
            max_iters,
            tol,
            bound,
            seed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct OptimaReport {
    /// Distance between the two solved minimizers.
    pub distance: f64,
    pub pass: bool,
    pub minimizer_base: Vec<f64>,
    pub minimizer_aug: Vec<f64>,
}

/// Solves both objectives over the same set from the same seeded start and
/// reports how far apart the minimizers land. Errors if either solve fails
/// to meet the residual tolerance within the iteration budget.
pub fn verify_unchanged_optima(
    base: &dyn Objective,
    augmented: &dyn Objective,
    set: &DecisionSet,
    cfg: &SolverConfig,
) -> Result<OptimaReport> {
    if base.param_dim() != augmented.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: base.param_dim(),
            got: augmented.param_dim(),
        });
    }
    if set.dim() != base.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: base.param_dim(),
            got: set.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w1 = set.sample_uniform(&mut rng);

    let solve = |f: &dyn Objective| -> Result<Vec<f64>> {
        let gd = GDConfig::new(cfg.eta, cfg.max_iters)?
            .with_projection(set.clone())
            .with_stop(StopRule::GradMapNorm(cfg.tol));
        let (w, trace) = grad_descent_obj(f, &w1, &gd)?;
        let it = trace.iterates();
        let residual = dist(&it[it.len() - 1], &it[it.len() - 2]) / cfg.eta;
        if residual > cfg.tol {
            return Err(Error::NotConverged {
                max_iters: cfg.max_iters,
                residual,
            });
        }
        Ok(w)
    };

    let minimizer_base = solve(base)?;
    let minimizer_aug = solve(augmented)?;
    let distance = dist(&minimizer_base, &minimizer_aug);
    Ok(OptimaReport {
        distance,
        pass: distance <= cfg.bound,
        minimizer_base,
        minimizer_aug,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralGain {
    pub lambda_min_base: f64,
    pub lambda_min_aug: f64,
    /// True when augmentation did not lower the minimum curvature.
    pub ordered: bool,
}

/// Compares the minimum eigenvalues of the constant Hessians of two
/// sum-of-norms objectives.
pub fn spectral_gain(base: &SumOfNorms, augmented: &SumOfNorms) -> Result<SpectralGain> {
    let hb = base
        .hessian(&vec![0.0; base.param_dim()])
        .ok_or_else(|| Error::InvalidParameter("base objective has no Hessian".into()))?;
    let ha = augmented
        .hessian(&vec![0.0; augmented.param_dim()])
        .ok_or_else(|| Error::InvalidParameter("augmented objective has no Hessian".into()))?;
    let lambda_min_base = min_eigenvalue(&hb)?;
    let lambda_min_aug = min_eigenvalue(&ha)?;
    Ok(SpectralGain {
        lambda_min_base,
        lambda_min_aug,
        ordered: lambda_min_aug >= lambda_min_base - SPECTRAL_ORDER_TOL,
    })
}

/// Central-difference Hessian of a gradient function, symmetrized.
pub fn fd_hessian<F>(grad: F, w: &[f64], h: f64) -> Result<SymMatrix>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_finite(w, "expansion point")?;
    if w.is_empty() {
        return Err(Error::InvalidParameter("expansion point is empty".into()));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "difference step must be positive, got {h}"
        )));
    }
    let d = w.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut wp = w.to_vec();
        let mut wm = w.to_vec();
        wp[j] += h;
        wm[j] -= h;
        let gp = grad(&wp)?;
        let gm = grad(&wm)?;
        if gp.len() != d || gm.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: gp.len().min(gm.len()),
            });
        }
        let col: Vec<f64> = gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        check_finite(&col, "difference quotient")?;
        cols.push(col);
    }
    Ok(SymMatrix::from_fn(d, |i, j| {
        0.5 * (cols[j][i] + cols[i][j])
    }))
}

/// Minimum eigenvalue of the finite-difference Hessian at `w`: a local
/// strong-convexity estimate usable on objectives without analytic Hessians.
pub fn estimate_local_strong_convexity<F>(grad: F, w: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    min_eigenvalue(&fd_hessian(grad, w, h)?)
}
