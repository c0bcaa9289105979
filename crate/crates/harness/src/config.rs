//! Experiment configuration: a single TOML document with flat sections.
//!
//! Every field except `experiment` has a default, so a minimal config is one
//! line. The fully resolved config is persisted in the run manifest, which is
//! what makes reruns reproducible.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use augclust_core::datagen::GenSpec;
use augclust_core::metric::Divergence;
use augclust_core::transforms::TransformSpec;
use augclust_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Epochs-to-converge of baseline vs augmented soft-min across a noise
    /// variance grid.
    NoiseSweep,
    /// Per-step contraction of augmented quadratics across a curvature grid.
    RateCheck,
    /// Paired argmin agreement between baseline and augmented losses.
    UnchangedOptima,
    /// Graduated smoothed descent, baseline vs curvature-augmented, on the
    /// rippled quadratic family.
    GraduatedCompare,
    /// Analytic vs finite-difference Hessians and spectral ordering on random
    /// sum-of-norms instances.
    HessianCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::NoiseSweep => "noise_sweep",
            ExperimentKind::RateCheck => "rate_check",
            ExperimentKind::UnchangedOptima => "unchanged_optima",
            ExperimentKind::GraduatedCompare => "graduated_compare",
            ExperimentKind::HessianCheck => "hessian_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    SoftMin,
    SumOfNorms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveConfig {
    pub loss: LossKind,
    /// Soft-min inverse temperature.
    pub beta: f64,
    pub divergence: Divergence,
    /// Soft-min candidates picked nearest each centroid from the original
    /// data; 0 selects the centroids themselves.
    pub candidates_per_cluster: usize,
    /// Sum-of-norms coupling strength.
    pub gamma: f64,
    /// Pair weight among original points.
    pub alpha1: f64,
    /// Pair weight for pairs touching a transformed copy.
    pub alpha2: f64,
    /// Ripple amplitude of the rippled-quadratic synthetic family.
    pub amplitude: f64,
    /// Ripple frequency; amplitude * frequency^2 < 1/2 keeps the family
    /// strongly convex so the grid-search optimum oracle stays reliable.
    pub frequency: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::SoftMin,
            beta: 0.5,
            divergence: Divergence::SquaredEuclidean,
            candidates_per_cluster: 0,
            gamma: 1e-4,
            alpha1: 0.25,
            alpha2: 0.5,
            amplitude: 4.0,
            frequency: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Step size shared by all solvers.
    pub eta: f64,
    /// Iteration budget of plain descent runs.
    pub max_iters: usize,
    /// Residual tolerance deciding that a reference solve converged.
    pub tol: f64,
    /// Outer phases of graduated descent.
    pub phases: usize,
    /// Monte-Carlo draws per smoothed gradient.
    pub samples: usize,
    /// Radius divisor between graduated phases.
    pub shrink: f64,
    /// Strong-convexity modulus assumed by the baseline phase schedule.
    pub mu: f64,
    /// Extra curvature contributed by the synthetic augmentation.
    pub kappa: f64,
    /// Initial smoothing radius; 0 selects half the set diameter.
    pub delta1: f64,
    /// Hard cap on inner iterations per phase.
    pub t_cap: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eta: 0.1,
            max_iters: 200_000,
            tol: 1e-10,
            phases: 15,
            samples: 256,
            shrink: 2.0,
            mu: 1.0,
            kappa: 1.0,
            delta1: 0.0,
            t_cap: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Convergence threshold used by epoch counts.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Sweep grid; its meaning depends on the experiment (noise variance,
    /// extra curvature, or instance index).
    #[serde(default = "default_sweep")]
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub gen: GenSpec,
    #[serde(default = "default_transform")]
    pub transform: TransformSpec,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_epsilon() -> f64 {
    1e-3
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_sweep() -> Vec<f64> {
    vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
}

fn default_transform() -> TransformSpec {
    TransformSpec::gaussian_noise(4.0, 1).expect("static default")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::NoiseSweep,
            seeds: default_seeds(),
            epsilon: default_epsilon(),
            output_dir: default_output_dir(),
            sweep: default_sweep(),
            gen: GenSpec::default(),
            transform: default_transform(),
            objective: ObjectiveConfig::default(),
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))?;
        cfg.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validated(self) -> Result<Self> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seeds must be non-empty".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.sweep.is_empty() {
            return Err(Error::InvalidParameter("sweep grid must be non-empty".into()));
        }
        if self.sweep.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sweep values must be finite".into()));
        }
        self.gen.validate()?;
        self.transform.clone().validated()?;

        let o = &self.objective;
        for (name, v) in [
            ("beta", o.beta),
            ("gamma", o.gamma),
            ("alpha1", o.alpha1),
            ("alpha2", o.alpha2),
            ("amplitude", o.amplitude),
            ("frequency", o.frequency),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "objective.{name} must be finite and nonnegative, got {v}"
                )));
            }
        }

        let p = &self.optimizer;
        if !p.eta.is_finite() || p.eta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "optimizer.eta must be positive, got {}",
                p.eta
            )));
        }
        for (name, v) in [("max_iters", p.max_iters), ("phases", p.phases), ("samples", p.samples), ("t_cap", p.t_cap)] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!(
                    "optimizer.{name} must be at least 1"
                )));
            }
        }
        if !p.tol.is_finite() || p.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "optimizer.tol must be positive, got {}",
                p.tol
            )));
        }
        if !p.shrink.is_finite() || p.shrink <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "optimizer.shrink must exceed 1, got {}",
                p.shrink
            )));
        }
        if !p.mu.is_finite() || p.mu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "optimizer.mu must be positive, got {}",
                p.mu
            )));
        }
        if !p.kappa.is_finite() || p.kappa < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "optimizer.kappa must be nonnegative, got {}",
                p.kappa
            )));
        }
        if !p.delta1.is_finite() || p.delta1 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "optimizer.delta1 must be nonnegative, got {}",
                p.delta1
            )));
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str("experiment = \"noise_sweep\"").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::NoiseSweep);
        assert_eq!(cfg.seeds, vec![0]);
        assert_eq!(cfg.sweep.len(), 6);
        assert_eq!(cfg.gen.n_per_cluster, 100);
        assert_eq!(cfg.optimizer.shrink, 2.0);
    }

    #[test]
    fn nested_sections_parse() {
        let text = r#"
experiment = "unchanged_optima"
seeds = [0, 1, 2]
sweep = [0.0, 1.0, 4.0]
epsilon = 1e-3

[gen]
n_per_cluster = 50
spread = 1.0

[transform]
kind = "gaussian_noise"
variance = 2.0
seed = 7

[objective]
loss = "sum_of_norms"
gamma = 1e-4

[optimizer]
eta = 0.5
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::UnchangedOptima);
        assert_eq!(cfg.seeds, vec![0, 1, 2]);
        assert_eq!(cfg.objective.loss, LossKind::SumOfNorms);
        assert_eq!(cfg.gen.n_per_cluster, 50);
        assert_eq!(cfg.optimizer.eta, 0.5);
        assert_eq!(cfg.transform.seed, 7);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("experiment = \"bogus\"").is_err());
        assert!(
            ExperimentConfig::from_toml_str("experiment = \"rate_check\"\nseeds = []").is_err()
        );
        assert!(
            ExperimentConfig::from_toml_str("experiment = \"rate_check\"\nepsilon = 0.0").is_err()
        );
        assert!(ExperimentConfig::from_toml_str(
            "experiment = \"rate_check\"\n[optimizer]\nshrink = 1.0"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml_str(
            "experiment = \"rate_check\"\n[transform]\nkind = \"gaussian_noise\"\nvariance = -1.0"
        )
        .is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml_str("experiment = \"graduated_compare\"").unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
