//! Projected gradient descent and graduated smoothed descent.
//!
//! [`grad_descent`] runs the plain projected update `w <- P(w - eta g)`.
//! [`graduated_descent`] wraps it in outer phases that shrink a smoothing
//! radius and a trust ball together: each phase minimizes the smoothed
//! objective over the decision set intersected with a ball of radius
//! `1.5 delta` around the warm start, runs the phase-length schedule of
//! [`inner_iterations`], then halves (by default) the radius and re-centers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::objective::Objective;
use crate::sets::{Ball, BallRestriction, DecisionSet, Projector, MEMBERSHIP_TOL};
use crate::smoothing::{SmoothedOracle, SmoothingParams};
use crate::vector::{check_dim, check_finite, dist};
use crate::{Error, Result};

/// Source of descent directions: exact gradients or a smoothed estimator.
pub trait GradientOracle {
    fn dim(&self) -> usize;
    /// Diagnostic value recorded in traces.
    fn value(&self, w: &[f64]) -> Result<f64>;
    fn grad(&self, w: &[f64]) -> Result<Vec<f64>>;
    /// Underlying gradient evaluations consumed per `grad` call.
    fn grad_cost(&self) -> usize;
}

/// Plain objective gradients, one evaluation per call.
pub struct ExactOracle<'a>(pub &'a dyn Objective);

impl GradientOracle for ExactOracle<'_> {
    fn dim(&self) -> usize {
        self.0.param_dim()
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        self.0.value(w)
    }

    fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.0.grad(w)
    }

    fn grad_cost(&self) -> usize {
        1
    }
}

impl GradientOracle for SmoothedOracle<'_> {
    fn dim(&self) -> usize {
        self.objective.param_dim()
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        self.objective.value(w)
    }

    fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.smoothed_grad(w)
    }

    fn grad_cost(&self) -> usize {
        self.gradient_cost()
    }
}

#[derive(Debug, Clone)]
pub enum StopRule {
    /// Stop once the projected step length per unit step size,
    /// `||w_next - w|| / eta`, falls below the tolerance.
    GradMapNorm(f64),
    /// Stop once the iterate is within `epsilon` of `target`.
    DistanceTo { target: Vec<f64>, epsilon: f64 },
}

impl StopRule {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            StopRule::GradMapNorm(tol) => {
                if !tol.is_finite() || *tol <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "stop tolerance must be positive, got {tol}"
                    )));
                }
            }
            StopRule::DistanceTo { target, epsilon } => {
                check_dim(target, dim)?;
                check_finite(target, "stop target")?;
                if !epsilon.is_finite() || *epsilon <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "stop distance must be positive, got {epsilon}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn triggered(&self, prev: &[f64], next: &[f64], eta: f64) -> bool {
        match self {
            StopRule::GradMapNorm(tol) => dist(prev, next) / eta <= *tol,
            StopRule::DistanceTo { target, epsilon } => dist(next, target) <= *epsilon,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GDConfig {
    pub eta: f64,
    pub max_iters: usize,
    pub projection: Option<DecisionSet>,
    pub stop: Option<StopRule>,
}

impl GDConfig {
    pub fn new(eta: f64, max_iters: usize) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {eta}"
            )));
        }
        if max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(Self {
            eta,
            max_iters,
            projection: None,
            stop: None,
        })
    }

    pub fn with_projection(mut self, set: DecisionSet) -> Self {
        self.projection = Some(set);
        self
    }

    pub fn with_stop(mut self, rule: StopRule) -> Self {
        self.stop = Some(rule);
        self
    }
}

/// Per-iteration record of an optimization run.
#[derive(Debug, Clone)]
pub struct OptTrace {
    iterates: Vec<Vec<f64>>,
    values: Vec<f64>,
    cum_grad_evals: Vec<usize>,
    phase_boundaries: Vec<usize>,
    dist_to_ref: Option<Vec<f64>>,
}

impl OptTrace {
    pub fn new(w1: Vec<f64>, value: f64) -> Self {
        Self {
            iterates: vec![w1],
            values: vec![value],
            cum_grad_evals: vec![0],
            phase_boundaries: Vec::new(),
            dist_to_ref: None,
        }
    }

    pub fn push(&mut self, w: Vec<f64>, value: f64, grad_evals: usize) {
        assert_eq!(w.len(), self.iterates[0].len(), "trace dimension changed");
        let cum = self.cum_grad_evals.last().unwrap() + grad_evals;
        self.iterates.push(w);
        self.values.push(value);
        self.cum_grad_evals.push(cum);
    }

    /// Marks the current final iterate as the start of a new phase.
    pub fn mark_phase(&mut self) {
        self.phase_boundaries.push(self.iterates.len() - 1);
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iterates(&self) -> &[Vec<f64>] {
        &self.iterates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cum_grad_evals(&self) -> &[usize] {
        &self.cum_grad_evals
    }

    pub fn total_grad_evals(&self) -> usize {
        *self.cum_grad_evals.last().unwrap()
    }

    pub fn phase_boundaries(&self) -> &[usize] {
        &self.phase_boundaries
    }

    pub fn final_iterate(&self) -> &[f64] {
        self.iterates.last().unwrap()
    }

    pub fn distances_to(&self, w_star: &[f64]) -> Result<Vec<f64>> {
        check_dim(w_star, self.iterates[0].len())?;
        check_finite(w_star, "reference point")?;
        Ok(self.iterates.iter().map(|w| dist(w, w_star)).collect())
    }

    /// Computes and stores distances to a reference optimum.
    pub fn record_reference(&mut self, w_star: &[f64]) -> Result<()> {
        self.dist_to_ref = Some(self.distances_to(w_star)?);
        Ok(())
    }

    pub fn dist_to_ref(&self) -> Option<&[f64]> {
        self.dist_to_ref.as_deref()
    }

    /// Distances between consecutive phase starts (and the final iterate),
    /// one entry per completed phase.
    pub fn phase_displacements(&self) -> Vec<f64> {
        let mut anchors: Vec<usize> = self.phase_boundaries.clone();
        anchors.push(self.iterates.len() - 1);
        anchors
            .windows(2)
            .map(|pair| dist(&self.iterates[pair[0]], &self.iterates[pair[1]]))
            .collect()
    }

    /// Cumulative gradient evaluations spent when the trace first comes
    /// within `epsilon` of `w_star`, if it ever does.
    pub fn grad_evals_to_reach(&self, w_star: &[f64], epsilon: f64) -> Result<Option<usize>> {
        let d = self.distances_to(w_star)?;
        Ok(d
            .iter()
            .position(|x| *x <= epsilon)
            .map(|t| self.cum_grad_evals[t]))
    }
}

fn descend_into(
    trace: &mut OptTrace,
    oracle: &dyn GradientOracle,
    projection: Option<&dyn Projector>,
    eta: f64,
    max_iters: usize,
    stop: Option<&StopRule>,
) -> Result<()> {
    let mut w = trace.final_iterate().to_vec();
    for t in 0..max_iters {
        let g = oracle.grad(&w)?;
        if g.len() != w.len() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: t });
        }
        let mut next: Vec<f64> = w.iter().zip(&g).map(|(x, gi)| x - eta * gi).collect();
        if let Some(p) = projection {
            next = p.project(&next);
        }
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: t });
        }
        trace.push(next.clone(), oracle.value(&next)?, oracle.grad_cost());
        let done = stop.map(|s| s.triggered(&w, &next, eta)).unwrap_or(false);
        w = next;
        if done {
            break;
        }
    }
    Ok(())
}

/// Projected gradient descent from `w1`. The start point must already lie
/// in the projection set when one is supplied.
pub fn grad_descent<O: GradientOracle>(
    oracle: &O,
    w1: &[f64],
    cfg: &GDConfig,
) -> Result<(Vec<f64>, OptTrace)> {
    check_dim(w1, oracle.dim())?;
    check_finite(w1, "start point")?;
    if !cfg.eta.is_finite() || cfg.eta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {}",
            cfg.eta
        )));
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if let Some(stop) = &cfg.stop {
        stop.validate(w1.len())?;
    }
    if let Some(set) = &cfg.projection {
        if !set.contains(w1, MEMBERSHIP_TOL) {
            return Err(Error::InvalidParameter(
                "start point lies outside the decision set".into(),
            ));
        }
    }
    let mut trace = OptTrace::new(w1.to_vec(), oracle.value(w1)?);
    descend_into(
        &mut trace,
        oracle,
        cfg.projection.as_ref().map(|s| s as &dyn Projector),
        cfg.eta,
        cfg.max_iters,
        cfg.stop.as_ref(),
    )?;
    Ok((trace.final_iterate().to_vec(), trace))
}

/// Convenience wrapper running [`grad_descent`] with exact gradients.
pub fn grad_descent_obj(
    objective: &dyn Objective,
    w1: &[f64],
    cfg: &GDConfig,
) -> Result<(Vec<f64>, OptTrace)> {
    grad_descent(&ExactOracle(objective), w1, cfg)
}

pub const DEFAULT_SHRINK: f64 = 2.0;
pub const DEFAULT_T_CAP: usize = 10_000;

/// Phase length `ceil(2 ln(delta_m / (4 diam)) / ln(1 - eta (mu + kappa)))`,
/// clamped to `[1, t_cap]`.
pub fn inner_iterations(
    delta_m: f64,
    diam_km: f64,
    eta: f64,
    mu_kappa: f64,
    t_cap: usize,
) -> Result<usize> {
    for (name, v) in [
        ("delta_m", delta_m),
        ("diam_km", diam_km),
        ("eta", eta),
        ("mu_kappa", mu_kappa),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let contraction = eta * mu_kappa;
    if contraction >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "eta * mu_kappa must stay below 1, got {contraction}"
        )));
    }
    if t_cap == 0 {
        return Err(Error::InvalidParameter("t_cap must be at least 1".into()));
    }
    let raw = 2.0 * (delta_m / (4.0 * diam_km)).ln() / (1.0 - contraction).ln();
    let t = raw.ceil();
    if t <= 1.0 {
        return Ok(1);
    }
    Ok((t as usize).min(t_cap))
}

#[derive(Debug, Clone)]
pub struct GraduatedConfig {
    /// Number of outer phases M.
    pub phases: usize,
    /// Initial smoothing radius; defaults to half the set diameter.
    pub delta1: Option<f64>,
    /// Radius divisor applied between phases.
    pub shrink: f64,
    pub eta: f64,
    /// Strong-convexity estimate used by the phase-length schedule.
    pub mu_kappa: f64,
    /// Monte-Carlo draws per smoothed gradient.
    pub samples: usize,
    pub seed: u64,
    /// Hard cap on inner iterations per phase.
    pub t_cap: usize,
}

impl GraduatedConfig {
    pub fn new(phases: usize, eta: f64, mu_kappa: f64, samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            phases,
            delta1: None,
            shrink: DEFAULT_SHRINK,
            eta,
            mu_kappa,
            samples,
            seed,
            t_cap: DEFAULT_T_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_delta1(mut self, delta1: f64) -> Result<Self> {
        self.delta1 = Some(delta1);
        self.validate()?;
        Ok(self)
    }

    pub fn with_shrink(mut self, shrink: f64) -> Result<Self> {
        self.shrink = shrink;
        self.validate()?;
        Ok(self)
    }

    pub fn with_t_cap(mut self, t_cap: usize) -> Result<Self> {
        self.t_cap = t_cap;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases == 0 {
            return Err(Error::InvalidParameter("need at least one phase".into()));
        }
        if !(self.shrink.is_finite() && self.shrink > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shrink factor must exceed 1, got {}",
                self.shrink
            )));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {}",
                self.eta
            )));
        }
        if !(self.mu_kappa.is_finite() && self.mu_kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu_kappa must be positive, got {}",
                self.mu_kappa
            )));
        }
        if self.eta * self.mu_kappa >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "eta * mu_kappa must stay below 1, got {}",
                self.eta * self.mu_kappa
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        if self.t_cap == 0 {
            return Err(Error::InvalidParameter("t_cap must be at least 1".into()));
        }
        if let Some(d) = self.delta1 {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "initial radius must be positive, got {d}"
                )));
            }
        }
        Ok(())
    }

    /// Smoothing radius entering phase `m` (1-based).
    pub fn delta_at(&self, set_diameter: f64, m: usize) -> f64 {
        let d1 = self.delta1.unwrap_or(set_diameter / 2.0);
        d1 / self.shrink.powi(m as i32 - 1)
    }

    /// Radius left after the final phase, the target accuracy of the run.
    pub fn final_delta(&self, set_diameter: f64) -> f64 {
        self.delta_at(set_diameter, self.phases + 1)
    }
}

/// Graduated descent: smoothed projected gradient phases over shrinking
/// trust regions, warm-started from a uniform draw over the set.
///
/// Every phase reuses the configured draw stream, so sampling error scales
/// with the radius instead of re-randomizing and phase outputs stay
/// comparable across the schedule.
pub fn graduated_descent(
    objective: &dyn Objective,
    set: &DecisionSet,
    cfg: &GraduatedConfig,
) -> Result<(Vec<f64>, OptTrace)> {
    cfg.validate()?;
    if set.dim() != objective.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: objective.param_dim(),
            got: set.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w1 = set.sample_uniform(&mut rng);
    let mut delta = cfg.delta1.unwrap_or(set.diameter() / 2.0);

    let mut trace = OptTrace::new(w1.clone(), objective.value(&w1)?);
    let mut w = w1;
    for m in 1..=cfg.phases {
        let mut run = || -> Result<()> {
            let ball = Ball::new(w.clone(), 1.5 * delta)?;
            let region = BallRestriction::new(set, ball);
            let t = inner_iterations(delta, region.diameter(), cfg.eta, cfg.mu_kappa, cfg.t_cap)?;
            let params = SmoothingParams::new(delta, cfg.samples, cfg.seed)?;
            let oracle = SmoothedOracle::new(objective, params);
            trace.mark_phase();
            descend_into(&mut trace, &oracle, Some(&region), cfg.eta, t, None)
        };
        run().map_err(|e| e.in_phase(m))?;
        w = trace.final_iterate().to_vec();
        delta /= cfg.shrink;
    }
    Ok((w, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{augment_unnormalized, Quadratic};
    use crate::vector::norm;

    #[test]
    fn starting_at_the_optimum_never_moves() {
        let f = Quadratic::isotropic(vec![3.0, -1.0], 2.0, 1).unwrap();
        let cfg = GDConfig::new(0.25, 5).unwrap();
        let (w, trace) = grad_descent_obj(&f, &[3.0, -1.0], &cfg).unwrap();
        assert_eq!(w, vec![3.0, -1.0]);
        assert_eq!(trace.len(), 6);
        for it in trace.iterates() {
            assert_eq!(it, &vec![3.0, -1.0]);
        }
    }

    #[test]
    fn full_step_solves_scalar_quadratic_in_one_iteration() {
        let f = Quadratic::isotropic(vec![3.0], 1.0, 1).unwrap();
        let cfg = GDConfig::new(1.0, 4).unwrap();
        for start in [-10.0, 0.0, 8.5] {
            let (_, trace) = grad_descent_obj(&f, &[start], &cfg).unwrap();
            assert_eq!(trace.iterates()[1], vec![3.0]);
        }
    }

    #[test]
    fn per_step_contraction_obeys_the_strong_convexity_bound() {
        // Curvatures (1, 2) at eta = 1/2: squared distances must contract by
        // at least 1 - eta * mu each step.
        let f = Quadratic::with_diag(vec![0.0, 0.0], vec![1.0, 2.0], 1).unwrap();
        let cfg = GDConfig::new(0.5, 40).unwrap();
        let (_, trace) = grad_descent_obj(&f, &[5.0, -3.0], &cfg).unwrap();
        let d = trace.distances_to(&[0.0, 0.0]).unwrap();
        let bound = 0.5;
        for pair in d.windows(2) {
            if pair[0] < 1e-12 {
                break;
            }
            let ratio = (pair[1] * pair[1]) / (pair[0] * pair[0]);
            assert!(ratio <= bound * (1.0 + 1e-10), "ratio {ratio}");
        }
    }

    #[test]
    fn augmented_objective_contracts_at_the_combined_rate() {
        let f = Quadratic::isotropic(vec![1.0, 1.0], 0.5, 2).unwrap();
        let g = Quadratic::isotropic(vec![1.0, 1.0], 0.25, 2).unwrap();
        let combined = augment_unnormalized(f, g).unwrap();
        let eta = 0.8;
        let cfg = GDConfig::new(eta, 60).unwrap();
        let (_, trace) = grad_descent_obj(&combined, &[9.0, -7.0], &cfg).unwrap();
        let d = trace.distances_to(&[1.0, 1.0]).unwrap();
        let bound = 1.0 - eta * 0.75;
        for pair in d.windows(2) {
            if pair[0] < 1e-12 {
                break;
            }
            let ratio = (pair[1] * pair[1]) / (pair[0] * pair[0]);
            assert!(ratio <= bound * (1.0 + 1e-10), "ratio {ratio}");
        }
    }

    #[test]
    fn projection_keeps_iterates_feasible() {
        let f = Quadratic::isotropic(vec![10.0, 10.0], 1.0, 1).unwrap();
        let set = DecisionSet::axis_box(vec![0.0, 0.0], vec![2.0, 3.0]).unwrap();
        let cfg = GDConfig::new(0.5, 30).unwrap().with_projection(set.clone());
        let (w, trace) = grad_descent_obj(&f, &[0.5, 0.5], &cfg).unwrap();
        for it in trace.iterates() {
            assert!(set.contains(it, MEMBERSHIP_TOL));
        }
        // The constrained optimum is the box corner nearest the center.
        assert!(dist(&w, &[2.0, 3.0]) < 1e-9);
    }

    #[test]
    fn start_outside_the_set_is_rejected() {
        let f = Quadratic::isotropic(vec![0.0], 1.0, 1).unwrap();
        let set = DecisionSet::axis_box(vec![0.0], vec![1.0]).unwrap();
        let cfg = GDConfig::new(0.5, 5).unwrap().with_projection(set);
        assert!(grad_descent_obj(&f, &[2.0], &cfg).is_err());
    }

    #[test]
    fn stop_rules_end_the_run_early() {
        let f = Quadratic::isotropic(vec![0.0, 0.0], 1.0, 1).unwrap();
        let cfg = GDConfig::new(0.5, 10_000)
            .unwrap()
            .with_stop(StopRule::GradMapNorm(1e-8));
        let (w, trace) = grad_descent_obj(&f, &[4.0, 4.0], &cfg).unwrap();
        assert!(trace.len() < 200);
        assert!(norm(&w) < 1e-7);

        let cfg = GDConfig::new(0.5, 10_000).unwrap().with_stop(StopRule::DistanceTo {
            target: vec![0.0, 0.0],
            epsilon: 1e-3,
        });
        let (w, trace) = grad_descent_obj(&f, &[4.0, 4.0], &cfg).unwrap();
        assert!(norm(&w) <= 1e-3);
        assert!(trace.len() < 50);
    }

    #[test]
    fn non_finite_gradients_report_the_iteration() {
        struct Exploding;
        impl Objective for Exploding {
            fn value(&self, _w: &[f64]) -> Result<f64> {
                Ok(0.0)
            }
            fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![if w[0] > 10.0 { f64::NAN } else { -5.0 }])
            }
            fn n_points(&self) -> usize {
                1
            }
            fn param_dim(&self) -> usize {
                1
            }
        }
        let cfg = GDConfig::new(1.0, 100).unwrap();
        match grad_descent_obj(&Exploding, &[0.0], &cfg) {
            Err(Error::NonFiniteGradient { iteration }) => assert!(iteration >= 2),
            other => panic!("expected a gradient error, got {other:?}"),
        }
    }

    #[test]
    fn trace_bookkeeping_is_consistent() {
        let f = Quadratic::isotropic(vec![0.0], 1.0, 1).unwrap();
        let cfg = GDConfig::new(0.1, 7).unwrap();
        let (_, trace) = grad_descent_obj(&f, &[1.0], &cfg).unwrap();
        assert_eq!(trace.len(), 8);
        assert_eq!(trace.values().len(), 8);
        assert_eq!(trace.cum_grad_evals(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(trace.total_grad_evals(), 7);
    }

    #[test]
    fn phase_length_formula_frozen_values() {
        // ratio 1/12 at eta (mu + kappa) = 1/2 gives ceil(7.17) = 8.
        let t = inner_iterations(1.0, 3.0, 0.5, 1.0, 10_000).unwrap();
        assert_eq!(t, 8);
        // Zero-length log at delta = 4 diam returns the minimum.
        assert_eq!(inner_iterations(4.0, 1.0, 0.5, 1.0, 10_000).unwrap(), 1);
        // Cap engages for tiny contraction.
        assert_eq!(inner_iterations(1.0, 3.0, 1e-6, 1e-3, 10_000).unwrap(), 10_000);
        // Contraction at or above 1 is a domain error, never a clamp.
        assert!(inner_iterations(1.0, 3.0, 2.0, 0.5, 10_000).is_err());
        assert!(inner_iterations(1.0, 3.0, 0.5, 3.0, 10_000).is_err());
    }

    #[test]
    fn graduated_descent_reaches_the_final_radius() {
        let f = Quadratic::isotropic(vec![20.0, 20.0], 1.0, 1).unwrap();
        let set = DecisionSet::axis_box(vec![0.0, 0.0], vec![40.0, 40.0]).unwrap();
        for seed in 0..5 {
            let cfg = GraduatedConfig::new(8, 0.5, 1.0, 128, seed).unwrap();
            let (w, trace) = graduated_descent(&f, &set, &cfg).unwrap();
            let target = cfg.final_delta(set.diameter());
            assert!(
                dist(&w, &[20.0, 20.0]) <= target,
                "seed {seed}: {} > {target}",
                dist(&w, &[20.0, 20.0])
            );
            assert_eq!(trace.phase_boundaries().len(), 8);
            assert_eq!(trace.phase_boundaries()[0], 0);
        }
    }

    #[test]
    fn graduated_iterates_stay_inside_their_phase_ball() {
        let f = Quadratic::isotropic(vec![20.0, 20.0], 1.0, 1).unwrap();
        let set = DecisionSet::axis_box(vec![0.0, 0.0], vec![40.0, 40.0]).unwrap();
        let cfg = GraduatedConfig::new(6, 0.5, 1.0, 64, 3).unwrap();
        let (_, trace) = graduated_descent(&f, &set, &cfg).unwrap();
        let mut delta = set.diameter() / 2.0;
        let bounds = trace.phase_boundaries().to_vec();
        for (m, window) in bounds
            .iter()
            .zip(bounds.iter().skip(1).chain(std::iter::once(&(trace.len() - 1))))
            .enumerate()
        {
            let (start, end) = (*window.0, *window.1);
            let center = &trace.iterates()[start];
            for it in &trace.iterates()[start..=end] {
                assert!(set.contains(it, MEMBERSHIP_TOL), "phase {m} left the set");
                assert!(
                    dist(it, center) <= 1.5 * delta + MEMBERSHIP_TOL,
                    "phase {m} left its trust ball"
                );
            }
            delta /= cfg.shrink;
        }
    }

    #[test]
    fn graduated_descent_is_deterministic() {
        let f = Quadratic::isotropic(vec![10.0, 30.0], 1.0, 1).unwrap();
        let set = DecisionSet::axis_box(vec![0.0, 0.0], vec![40.0, 40.0]).unwrap();
        let cfg = GraduatedConfig::new(4, 0.5, 1.0, 32, 11).unwrap();
        let (a, _) = graduated_descent(&f, &set, &cfg).unwrap();
        let (b, _) = graduated_descent(&f, &set, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        assert!(GDConfig::new(0.0, 10).is_err());
        assert!(GDConfig::new(1.0, 0).is_err());
        assert!(GraduatedConfig::new(0, 0.5, 1.0, 8, 0).is_err());
        assert!(GraduatedConfig::new(4, 0.5, 3.0, 8, 0).is_err());
        assert!(GraduatedConfig::new(4, 0.5, 1.0, 0, 0).is_err());
        assert!(GraduatedConfig::new(4, 0.5, 1.0, 8, 0)
            .unwrap()
            .with_shrink(1.0)
            .is_err());
    }

    #[test]
    fn phase_displacements_cover_every_phase() {
        let f = Quadratic::isotropic(vec![20.0, 20.0], 1.0, 1).unwrap();
        let set = DecisionSet::axis_box(vec![0.0, 0.0], vec![40.0, 40.0]).unwrap();
        let cfg = GraduatedConfig::new(5, 0.5, 1.0, 64, 2).unwrap();
        let (_, trace) = graduated_descent(&f, &set, &cfg).unwrap();
        let disp = trace.phase_displacements();
        assert_eq!(disp.len(), 5);
        assert!(disp.iter().all(|d| d.is_finite()));
    }
}
