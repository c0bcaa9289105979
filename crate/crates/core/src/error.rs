//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ball intersection is empty or too thin to certify as feasible")]
    InfeasibleIntersection,

    #[error("point is not on the probability simplex: {0}")]
    NotOnSimplex(String),

    #[error("non-finite sample at draw {draw}")]
    NonFiniteSample { draw: usize },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("phase {phase} failed: {source}")]
    PhaseFailed {
        phase: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("solver did not converge within {max_iters} iterations (residual {residual:.3e})")]
    NotConverged { max_iters: usize, residual: f64 },

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an inner optimizer error with the graduated phase it occurred in.
    pub fn in_phase(self, phase: usize) -> Error {
        Error::PhaseFailed {
            phase,
            source: Box::new(self),
        }
    }
}
