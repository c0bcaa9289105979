//! Point-set transforms and the cluster-membership validity check.
//!
//! A transform maps each data point to a new point. Augmentation is only
//! sound when the transform keeps every point inside its own cluster, which
//! [`check_positive_supervision`] verifies against the ground-truth
//! centroids.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::metric::Divergence;
use crate::sum_norms::PairWeights;
use crate::vector::{check_finite, mean_point};
use crate::{Error, Result};

/// Labeled point cloud with its generating centroids.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub metric: Divergence,
}

impl Dataset {
    pub fn new(
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
        centroids: Vec<Vec<f64>>,
        metric: Divergence,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("dataset needs points".into()));
        }
        if centroids.is_empty() {
            return Err(Error::InvalidParameter("dataset needs centroids".into()));
        }
        if labels.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: labels.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points need dim >= 1".into()));
        }
        for p in points.iter().chain(&centroids) {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            check_finite(p, "dataset point")?;
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= centroids.len()) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} exceeds centroid count {}",
                centroids.len()
            )));
        }
        Ok(Self {
            points,
            labels,
            centroids,
            metric,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Index of the nearest centroid under the dataset metric; ties resolve
    /// to the lowest index.
    pub fn nearest_centroid(&self, point: &[f64]) -> Result<usize> {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, c) in self.centroids.iter().enumerate() {
            let d = self.metric.eval(point, c)?;
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    GaussianNoise {
        variance: f64,
    },
    Rotation {
        angle: f64,
        /// Rotation center; data centroid when omitted.
        center: Option<Vec<f64>>,
    },
    Duplicate,
    AlphaPair {
        alpha1: f64,
        alpha2: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(flatten)]
    pub kind: TransformKind,
    #[serde(default)]
    pub seed: u64,
}

impl TransformSpec {
    pub fn gaussian_noise(variance: f64, seed: u64) -> Result<Self> {
        Self {
            kind: TransformKind::GaussianNoise { variance },
            seed,
        }
        .validated()
    }

    pub fn rotation(angle: f64, center: Option<Vec<f64>>, seed: u64) -> Result<Self> {
        Self {
            kind: TransformKind::Rotation { angle, center },
            seed,
        }
        .validated()
    }

    pub fn duplicate() -> Self {
        Self {
            kind: TransformKind::Duplicate,
            seed: 0,
        }
    }

    pub fn alpha_pair(alpha1: f64, alpha2: f64) -> Result<Self> {
        Self {
            kind: TransformKind::AlphaPair { alpha1, alpha2 },
            seed: 0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        match &self.kind {
            TransformKind::GaussianNoise { variance } => {
                if !variance.is_finite() || *variance < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "noise variance must be finite and nonnegative, got {variance}"
                    )));
                }
            }
            TransformKind::Rotation { angle, center } => {
                if !angle.is_finite() {
                    return Err(Error::InvalidParameter("rotation angle must be finite".into()));
                }
                if let Some(c) = center {
                    check_finite(c, "rotation center")?;
                }
            }
            TransformKind::Duplicate => {}
            TransformKind::AlphaPair { alpha1, alpha2 } => {
                if !(alpha1.is_finite() && alpha2.is_finite() && *alpha1 >= 0.0 && alpha2 > alpha1)
                {
                    return Err(Error::InvalidParameter(format!(
                        "alpha pair needs alpha2 > alpha1 >= 0, got ({alpha1}, {alpha2})"
                    )));
                }
            }
        }
        Ok(self)
    }
}

/// Applies the transform to every point. Deterministic per `(kind, seed)`;
/// degenerate parameters (zero variance, zero angle) return the input
/// verbatim rather than a numerically perturbed copy.
pub fn apply_transform(spec: &TransformSpec, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    match &spec.kind {
        TransformKind::GaussianNoise { variance } => {
            if !variance.is_finite() || *variance < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "noise variance must be finite and nonnegative, got {variance}"
                )));
            }
            if *variance == 0.0 {
                return Ok(data.points.clone());
            }
            let normal = Normal::new(0.0, variance.sqrt())
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            Ok(data
                .points
                .iter()
                .map(|p| p.iter().map(|x| x + normal.sample(&mut rng)).collect())
                .collect())
        }
        TransformKind::Rotation { angle, center } => {
            if *angle == 0.0 {
                return Ok(data.points.clone());
            }
            if data.dim() < 2 {
                return Err(Error::InvalidParameter(
                    "rotation needs at least two coordinates".into(),
                ));
            }
            let center = match center {
                Some(c) => {
                    if c.len() < 2 {
                        return Err(Error::InvalidParameter(
                            "rotation center needs at least two coordinates".into(),
                        ));
                    }
                    c.clone()
                }
                None => mean_point(&data.points),
            };
            let (sin, cos) = angle.sin_cos();
            Ok(data
                .points
                .iter()
                .map(|p| {
                    let mut out = p.clone();
                    let x = p[0] - center[0];
                    let y = p[1] - center[1];
                    out[0] = center[0] + cos * x - sin * y;
                    out[1] = center[1] + sin * x + cos * y;
                    out
                })
                .collect())
        }
        TransformKind::Duplicate | TransformKind::AlphaPair { .. } => Ok(data.points.clone()),
    }
}

/// Pair weights over `2 n` indices (originals first, transformed copies
/// after): `alpha1` couples original-original pairs, `alpha2` every pair
/// touching a transformed copy. Equal values give the uniform map.
pub fn alpha_pair_weights(n_original: usize, alpha1: f64, alpha2: f64) -> Result<PairWeights> {
    if !(alpha1.is_finite() && alpha2.is_finite() && alpha1 >= 0.0 && alpha2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pair couplings must be finite and nonnegative, got ({alpha1}, {alpha2})"
        )));
    }
    PairWeights::from_fn(2 * n_original, |i, j| {
        if i < n_original && j < n_original {
            alpha1
        } else {
            alpha2
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisionReport {
    pub valid: bool,
    pub violating_indices: Vec<usize>,
}

/// Checks that every transformed point still has its source's ground-truth
/// centroid as the nearest one under the dataset metric.
pub fn check_positive_supervision(
    data: &Dataset,
    transformed: &[Vec<f64>],
) -> Result<SupervisionReport> {
    if data.centroids.is_empty() {
        return Err(Error::InvalidParameter("no centroids to check against".into()));
    }
    if transformed.len() != data.n() {
        return Err(Error::DimensionMismatch {
            expected: data.n(),
            got: transformed.len(),
        });
    }
    let mut violating_indices = Vec::new();
    for (i, p) in transformed.iter().enumerate() {
        if data.nearest_centroid(p)? != data.labels[i] {
            violating_indices.push(i);
        }
    }
    Ok(SupervisionReport {
        valid: violating_indices.is_empty(),
        violating_indices,
    })
}
