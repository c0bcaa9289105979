//! Numerical laboratory for studying how data-transform augmentation changes
//! the optimization behaviour of self-supervised clustering objectives.
//!
//! The crate is organised around a small set of building blocks:
//!
//! * [`objective`], [`sum_norms`], [`soft_min`]: evaluable objective bundles,
//!   including the sum-of-norms and soft-min clustering losses and the
//!   weighted combination of a base objective with a transform component.
//! * [`transforms`], [`datagen`]: labelled synthetic datasets, data
//!   transforms, and fair baseline/augmented comparison pairs.
//! * [`smoothing`]: Monte-Carlo ball smoothing and the smoothed gradient
//!   oracle used by the graduated optimizer.
//! * [`sets`], [`eigen`], [`vector`]: convex decision sets with exact and
//!   iterative projections, symmetric eigenvalue routines, and compensated
//!   vector arithmetic.
//! * [`optimizer`], [`analysis`]: projected gradient descent, graduated
//!   descent over shrinking trust regions, and estimators that compare
//!   measured convergence against closed-form rates.

pub mod analysis;
pub mod datagen;
pub mod eigen;
pub mod error;
pub mod metric;
pub mod objective;
pub mod optimizer;
pub mod sets;
pub mod smoothing;
pub mod soft_min;
pub mod sum_norms;
pub mod transforms;
pub mod vector;

pub use error::{Error, Result};
