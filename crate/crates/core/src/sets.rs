//! Convex decision sets with exact or iterative Euclidean projections.
//!
//! Balls, axis-aligned boxes, and the probability simplex project in closed
//! form. Intersections of balls, and the per-phase trust regions formed by
//! intersecting a base set with a ball, use Dykstra's alternating projection,
//! which converges to the exact projection onto the intersection.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::vector::{check_finite, dist, norm, sub};
use crate::{Error, Result};

/// Tolerance for set membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Dykstra stops once a full round moves the iterate less than this.
pub const DYKSTRA_MOVE_TOL: f64 = 1e-10;
/// Upper bound on Dykstra rounds.
pub const DYKSTRA_MAX_ROUNDS: usize = 10_000;

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_finite(&center, "ball center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(
                "ball radius must be finite and positive".into(),
            ));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        w.len() == self.dim() && dist(w, &self.center) <= self.radius + tol
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        let d = dist(w, &self.center);
        if d <= self.radius {
            return w.to_vec();
        }
        let s = self.radius / d;
        self.center
            .iter()
            .zip(w)
            .map(|(c, x)| c + s * (x - c))
            .collect()
    }
}

/// Convex feasible region for the optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSet {
    Ball(Ball),
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Probability simplex in `dim` coordinates.
    Simplex { dim: usize },
    BallIntersection(Vec<Ball>),
}

/// Anything that can project points onto a convex set.
///
/// `DecisionSet` implements this, and so does the per-phase trust region used
/// by the graduated optimizer, which is not representable as a plain variant.
pub trait Projector {
    fn project(&self, w: &[f64]) -> Vec<f64>;
    fn contains(&self, w: &[f64], tol: f64) -> bool;
    /// Diameter of the set. Exact for balls, boxes, and the simplex; an upper
    /// bound for intersections.
    fn diameter(&self) -> f64;
    fn dim(&self) -> usize;
}

impl DecisionSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(DecisionSet::Ball(Ball::new(center, radius)?))
    }

    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_finite(&lo, "box lower corner")?;
        check_finite(&hi, "box upper corner")?;
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidParameter(
                "box needs lo <= hi in every coordinate".into(),
            ));
        }
        if dist(&lo, &hi) == 0.0 {
            return Err(Error::InvalidParameter("box has zero diameter".into()));
        }
        Ok(DecisionSet::Box { lo, hi })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(
                "simplex needs at least two coordinates".into(),
            ));
        }
        Ok(DecisionSet::Simplex { dim })
    }

    /// Validates that the balls share a dimension and that the intersection
    /// is certifiably nonempty (alternating projections settle on a point
    /// inside every ball).
    pub fn ball_intersection(balls: Vec<Ball>) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::InvalidParameter(
                "ball intersection needs at least one ball".into(),
            ));
        }
        let d = balls[0].dim();
        if balls.iter().any(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: balls.iter().map(Ball::dim).find(|&x| x != d).unwrap(),
            });
        }
        // Feasibility probe: project the centroid of centers cyclically onto
        // each ball. If the intersection is nonempty this settles inside it;
        // if it is empty the cycle keeps moving and the final membership
        // check fails.
        let mut x = crate::vector::mean_point(
            &balls.iter().map(|b| b.center().to_vec()).collect::<Vec<_>>(),
        );
        for _ in 0..DYKSTRA_MAX_ROUNDS {
            let mut moved = 0.0f64;
            for b in &balls {
                let y = b.project(&x);
                moved = moved.max(dist(&y, &x));
                x = y;
            }
            if moved < 1e-12 {
                break;
            }
        }
        if balls.iter().all(|b| b.contains(&x, MEMBERSHIP_TOL)) {
            Ok(DecisionSet::BallIntersection(balls))
        } else {
            Err(Error::InfeasibleIntersection)
        }
    }

    /// Uniform sample from the set.
    ///
    /// Exact for balls, boxes, and the simplex. For ball intersections the
    /// sample is drawn by rejection from the smallest ball, falling back to
    /// the projected centroid if the intersection is too thin to hit.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            DecisionSet::Ball(b) => {
                let u = sample_ball_interior(b.dim(), rng);
                b.center()
                    .iter()
                    .zip(&u)
                    .map(|(c, x)| c + b.radius() * x)
                    .collect()
            }
            DecisionSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| if a == b { *a } else { rng.gen_range(*a..*b) })
                .collect(),
            DecisionSet::Simplex { dim } => {
                // Normalized unit-rate exponentials are uniform on the simplex.
                let draws: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = draws.iter().sum();
                draws.iter().map(|x| x / total).collect()
            }
            DecisionSet::BallIntersection(balls) => {
                let smallest = balls
                    .iter()
                    .min_by(|a, b| a.radius().partial_cmp(&b.radius()).unwrap())
                    .unwrap();
                for _ in 0..10_000 {
                    let u = sample_ball_interior(smallest.dim(), rng);
                    let cand: Vec<f64> = smallest
                        .center()
                        .iter()
                        .zip(&u)
                        .map(|(c, x)| c + smallest.radius() * x)
                        .collect();
                    if balls.iter().all(|b| b.contains(&cand, 0.0)) {
                        return cand;
                    }
                }
                let centroid = crate::vector::mean_point(
                    &balls.iter().map(|b| b.center().to_vec()).collect::<Vec<_>>(),
                );
                self.project(&centroid)
            }
        }
    }
}

impl Projector for DecisionSet {
    fn project(&self, w: &[f64]) -> Vec<f64> {
        match self {
            DecisionSet::Ball(b) => b.project(w),
            DecisionSet::Box { lo, hi } => w
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (a, b))| x.clamp(*a, *b))
                .collect(),
            DecisionSet::Simplex { .. } => project_simplex(w),
            DecisionSet::BallIntersection(balls) => {
                if balls.iter().all(|b| b.contains(w, 0.0)) {
                    return w.to_vec();
                }
                let projs: Vec<Box<dyn Fn(&[f64]) -> Vec<f64> + '_>> = balls
                    .iter()
                    .map(|b| Box::new(move |x: &[f64]| b.project(x)) as _)
                    .collect();
                dykstra(&projs, w)
            }
        }
    }

    fn contains(&self, w: &[f64], tol: f64) -> bool {
        match self {
            DecisionSet::Ball(b) => b.contains(w, tol),
            DecisionSet::Box { lo, hi } => {
                w.len() == lo.len()
                    && w.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(x, (a, b))| *x >= a - tol && *x <= b + tol)
            }
            DecisionSet::Simplex { dim } => {
                w.len() == *dim
                    && w.iter().all(|x| *x >= -tol)
                    && (w.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            DecisionSet::BallIntersection(balls) => balls.iter().all(|b| b.contains(w, tol)),
        }
    }

    fn diameter(&self) -> f64 {
        match self {
            DecisionSet::Ball(b) => 2.0 * b.radius(),
            DecisionSet::Box { lo, hi } => dist(lo, hi),
            // Distance between two vertices of the probability simplex.
            DecisionSet::Simplex { .. } => std::f64::consts::SQRT_2,
            DecisionSet::BallIntersection(balls) => balls
                .iter()
                .map(|b| 2.0 * b.radius())
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn dim(&self) -> usize {
        match self {
            DecisionSet::Ball(b) => b.dim(),
            DecisionSet::Box { lo, .. } => lo.len(),
            DecisionSet::Simplex { dim } => *dim,
            DecisionSet::BallIntersection(balls) => balls[0].dim(),
        }
    }
}

/// Trust region for one graduated phase: a base set intersected with a ball.
#[derive(Debug, Clone)]
pub struct BallRestriction<'a> {
    base: &'a DecisionSet,
    ball: Ball,
}

impl<'a> BallRestriction<'a> {
    pub fn new(base: &'a DecisionSet, ball: Ball) -> Self {
        Self { base, ball }
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }
}

impl Projector for BallRestriction<'_> {
    fn project(&self, w: &[f64]) -> Vec<f64> {
        if self.contains(w, 0.0) {
            return w.to_vec();
        }
        let projs: Vec<Box<dyn Fn(&[f64]) -> Vec<f64> + '_>> = vec![
            Box::new(|x: &[f64]| self.base.project(x)),
            Box::new(|x: &[f64]| self.ball.project(x)),
        ];
        dykstra(&projs, w)
    }

    fn contains(&self, w: &[f64], tol: f64) -> bool {
        self.base.contains(w, tol) && self.ball.contains(w, tol)
    }

    fn diameter(&self) -> f64 {
        self.base.diameter().min(2.0 * self.ball.radius())
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }
}

/// Dykstra's alternating projection onto an intersection of convex sets.
fn dykstra(projs: &[Box<dyn Fn(&[f64]) -> Vec<f64> + '_>], w: &[f64]) -> Vec<f64> {
    let mut x = w.to_vec();
    let mut increments = vec![vec![0.0; w.len()]; projs.len()];
    for _ in 0..DYKSTRA_MAX_ROUNDS {
        let round_start = x.clone();
        for (proj, inc) in projs.iter().zip(increments.iter_mut()) {
            let shifted: Vec<f64> = x.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
            let y = proj(&shifted);
            *inc = sub(&shifted, &y);
            x = y;
        }
        if dist(&x, &round_start) < DYKSTRA_MOVE_TOL {
            break;
        }
    }
    x
}

/// Euclidean projection onto the probability simplex via the sorted
/// threshold rule. Output is nonnegative and sums to one up to 1e-12.
pub fn project_simplex(q: &[f64]) -> Vec<f64> {
    assert!(!q.is_empty());
    let mut sorted = q.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (j as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    q.iter().map(|&u| (u - theta).max(0.0)).collect()
}

/// Interior-uniform sample from the unit ball: Gaussian direction scaled by
/// a `U^(1/d)` radius.
fn sample_ball_interior<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = norm(&v);
    if n == 0.0 {
        return v;
    }
    let r: f64 = rng.gen::<f64>().powf(1.0 / dim as f64);
    v.iter_mut().for_each(|x| *x *= r / n);
    v
}
