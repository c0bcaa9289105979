//! Synthetic Gaussian cluster generation and the size-matched comparison
//! protocol.
//!
//! Comparing a plain dataset against an augmented one is only fair when both
//! have the same point count, so [`build_comparison_pair`] duplicates the
//! originals in the baseline arm while the augmented arm appends transformed
//! copies.

use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::metric::Divergence;
use crate::transforms::{apply_transform, Dataset, TransformSpec};
use crate::vector::check_finite;
use crate::{Error, Result};

/// Settings for [`gen_clusters`]. The defaults give the standard four-cluster
/// planar layout used across the experiment suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub centroids: Vec<Vec<f64>>,
    pub n_per_cluster: usize,
    /// Isotropic standard deviation around each centroid.
    pub spread: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            centroids: vec![
                vec![10.0, 20.0],
                vec![30.0, 20.0],
                vec![20.0, 10.0],
                vec![20.0, 30.0],
            ],
            n_per_cluster: 100,
            spread: 1.0,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.centroids.is_empty() {
            return Err(Error::InvalidParameter("need at least one centroid".into()));
        }
        let dim = self.centroids[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("centroids need dim >= 1".into()));
        }
        for c in &self.centroids {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            check_finite(c, "centroid")?;
        }
        if self.n_per_cluster == 0 {
            return Err(Error::InvalidParameter("n_per_cluster must be at least 1".into()));
        }
        if !self.spread.is_finite() || self.spread < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "spread must be nonnegative, got {}",
                self.spread
            )));
        }
        Ok(())
    }
}

/// Draws `n_per_cluster` isotropic Gaussian points around each centroid,
/// labeled by generating centroid, grouped cluster by cluster.
pub fn gen_clusters(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.spread > 0.0 {
        Some(Normal::new(0.0, spec.spread).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let total = spec.centroids.len() * spec.n_per_cluster;
    let mut points = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (k, centroid) in spec.centroids.iter().enumerate() {
        for _ in 0..spec.n_per_cluster {
            let p = match noise {
                Some(n) => centroid.iter().map(|x| x + rng.sample(n)).collect(),
                None => centroid.clone(),
            };
            points.push(p);
            labels.push(k);
        }
    }
    Dataset::new(
        points,
        labels,
        spec.centroids.clone(),
        Divergence::SquaredEuclidean,
    )
}

/// Two size-matched datasets: originals duplicated vs originals plus their
/// transformed copies.
#[derive(Debug, Clone)]
pub struct ComparisonPair {
    pub baseline: Dataset,
    pub augmented: Dataset,
    /// Number of original points; both arms hold twice this many.
    pub n_original: usize,
}

pub fn build_comparison_pair(data: &Dataset, spec: &TransformSpec) -> Result<ComparisonPair> {
    let transformed = apply_transform(spec, data)?;

    let mut labels = data.labels.clone();
    labels.extend(data.labels.iter().cloned());

    let mut base_points = data.points.clone();
    base_points.extend(data.points.iter().cloned());
    let mut aug_points = data.points.clone();
    aug_points.extend(transformed);

    let baseline = Dataset::new(base_points, labels.clone(), data.centroids.clone(), data.metric)?;
    let augmented = Dataset::new(aug_points, labels, data.centroids.clone(), data.metric)?;
    Ok(ComparisonPair {
        baseline,
        augmented,
        n_original: data.n(),
    })
}

/// Writes `x0,...,x{d-1},label` CSV with LF endings. Coordinates use the
/// shortest decimal form that parses back to the same float.
pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for j in 0..data.dim() {
        out.push_str(&format!("x{j},"));
    }
    out.push_str("label\n");
    for (p, l) in data.points.iter().zip(&data.labels) {
        for x in p {
            out.push_str(&format!("{x},"));
        }
        out.push_str(&format!("{l}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::dist;

    #[test]
    fn default_layout_produces_four_hundred_points() {
        let data = gen_clusters(&GenSpec::default()).unwrap();
        assert_eq!(data.n(), 400);
        assert_eq!(data.dim(), 2);
        assert_eq!(data.centroids.len(), 4);
        for k in 0..4 {
            assert_eq!(data.labels.iter().filter(|&&l| l == k).count(), 100);
        }
    }

    #[test]
    fn zero_spread_collapses_onto_centroids() {
        let spec = GenSpec {
            spread: 0.0,
            ..GenSpec::default()
        };
        let data = gen_clusters(&spec).unwrap();
        for (p, l) in data.points.iter().zip(&data.labels) {
            assert_eq!(p, &data.centroids[*l]);
        }
    }

    #[test]
    fn cluster_means_concentrate_at_the_centroids() {
        let spec = GenSpec {
            n_per_cluster: 10_000,
            ..GenSpec::default()
        };
        let data = gen_clusters(&spec).unwrap();
        let bound = 4.0 * spec.spread / (spec.n_per_cluster as f64).sqrt();
        for (k, c) in data.centroids.iter().enumerate() {
            let members: Vec<&Vec<f64>> = data
                .points
                .iter()
                .zip(&data.labels)
                .filter(|(_, l)| **l == k)
                .map(|(p, _)| p)
                .collect();
            let mut mean = vec![0.0; data.dim()];
            for p in &members {
                for (m, x) in mean.iter_mut().zip(p.iter()) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= members.len() as f64;
            }
            assert!(dist(&mean, c) <= bound, "cluster {k} mean drifted");
        }
    }

    #[test]
    fn labels_agree_with_nearest_centroid_at_unit_spread() {
        for seed in [0, 1, 2] {
            let spec = GenSpec {
                seed,
                ..GenSpec::default()
            };
            let data = gen_clusters(&spec).unwrap();
            for (p, l) in data.points.iter().zip(&data.labels) {
                assert_eq!(data.nearest_centroid(p).unwrap(), *l);
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = gen_clusters(&GenSpec::default()).unwrap();
        let b = gen_clusters(&GenSpec::default()).unwrap();
        assert_eq!(a.points, b.points);
        let c = gen_clusters(&GenSpec {
            seed: 9,
            ..GenSpec::default()
        })
        .unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn comparison_arms_are_size_matched() {
        let data = gen_clusters(&GenSpec::default()).unwrap();
        for spec in [
            TransformSpec::duplicate(),
            TransformSpec::gaussian_noise(6.0, 7).unwrap(),
            TransformSpec::rotation(0.3, None, 0).unwrap(),
        ] {
            let pair = build_comparison_pair(&data, &spec).unwrap();
            assert_eq!(pair.baseline.n(), 800);
            assert_eq!(pair.augmented.n(), 800);
            assert_eq!(pair.n_original, 400);
            assert_eq!(pair.baseline.labels, pair.augmented.labels);
        }
    }

    #[test]
    fn duplicate_transform_gives_identical_arms() {
        let data = gen_clusters(&GenSpec::default()).unwrap();
        let pair = build_comparison_pair(&data, &TransformSpec::duplicate()).unwrap();
        assert_eq!(pair.baseline.points, pair.augmented.points);
    }

    #[test]
    fn noise_changes_exactly_the_transformed_rows() {
        let data = gen_clusters(&GenSpec::default()).unwrap();
        let spec = TransformSpec::gaussian_noise(6.0, 13).unwrap();
        let pair = build_comparison_pair(&data, &spec).unwrap();
        for i in 0..400 {
            assert_eq!(pair.baseline.points[i], pair.augmented.points[i]);
        }
        for i in 400..800 {
            assert_ne!(pair.baseline.points[i], pair.augmented.points[i], "row {i}");
        }
    }

    #[test]
    fn csv_output_matches_golden_content() {
        let data = Dataset::new(
            vec![vec![1.5, 2.25], vec![-0.5, 3.5]],
            vec![0, 1],
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            Divergence::SquaredEuclidean,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        write_dataset_csv(&data, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x0,x1,label\n1.5,2.25,0\n-0.5,3.5,1\n");
    }

    #[test]
    fn csv_coordinates_round_trip() {
        let data = gen_clusters(&GenSpec {
            n_per_cluster: 5,
            ..GenSpec::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        write_dataset_csv(&data, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        write_dataset_csv(&data, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);

        for (line, point) in text.lines().skip(1).zip(&data.points) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 3);
            for (f, x) in fields[..2].iter().zip(point.iter()) {
                assert_eq!(f.parse::<f64>().unwrap(), *x);
            }
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let no_centroids = GenSpec {
            centroids: vec![],
            ..GenSpec::default()
        };
        assert!(gen_clusters(&no_centroids).is_err());
        let negative_spread = GenSpec {
            spread: -1.0,
            ..GenSpec::default()
        };
        assert!(gen_clusters(&negative_spread).is_err());
        let empty_cluster = GenSpec {
            n_per_cluster: 0,
            ..GenSpec::default()
        };
        assert!(gen_clusters(&empty_cluster).is_err());
        let ragged = GenSpec {
            centroids: vec![vec![0.0, 0.0], vec![1.0]],
            ..GenSpec::default()
        };
        assert!(gen_clusters(&ragged).is_err());
    }
}
