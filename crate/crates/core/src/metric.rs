//! Pointwise divergences used by the clustering losses and for nearest
//! centroid assignment.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    /// Squared Euclidean distance.
    #[default]
    SquaredEuclidean,
    /// Generalized Kullback-Leibler divergence for nonnegative vectors,
    /// `sum(x ln(x/y) - x + y)`. Requires `y > 0` wherever `x > 0`.
    KullbackLeibler,
}

impl Divergence {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        match self {
            Divergence::SquaredEuclidean => Ok(crate::vector::dist_sq(x, y)),
            Divergence::KullbackLeibler => {
                let mut acc = 0.0;
                for (&a, &b) in x.iter().zip(y) {
                    if a < 0.0 || b < 0.0 {
                        return Err(Error::InvalidParameter(
                            "kullback-leibler divergence needs nonnegative coordinates".into(),
                        ));
                    }
                    if a == 0.0 {
                        acc += b;
                    } else {
                        if b == 0.0 {
                            return Err(Error::InvalidParameter(
                                "kullback-leibler divergence undefined for x > 0, y = 0".into(),
                            ));
                        }
                        acc += a * (a / b).ln() - a + b;
                    }
                }
                if acc.is_finite() {
                    Ok(acc)
                } else {
                    Err(Error::NonFinite("kullback-leibler divergence".into()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_euclidean_matches_hand_value() {
        let d = Divergence::SquaredEuclidean;
        assert_eq!(d.eval(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 25.0);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_iff_equal() {
        let d = Divergence::KullbackLeibler;
        assert_eq!(d.eval(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let v = d.eval(&[1.0, 2.0], &[2.0, 1.0]).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn kl_rejects_negative_and_zero_denominator() {
        let d = Divergence::KullbackLeibler;
        assert!(d.eval(&[-1.0], &[1.0]).is_err());
        assert!(d.eval(&[1.0], &[0.0]).is_err());
    }
}
