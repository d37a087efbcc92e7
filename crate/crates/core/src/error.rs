//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("band limit must be nonnegative, got {0}")]
    NegativeBandLimit(i64),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("right-hand side has nonzero mean {mean:.3e} (tolerance {tol:.1e})")]
    NonZeroMean { mean: f64, tol: f64 },

    #[error("all rows of the tuple are the zero polynomial")]
    DegenerateTuple,

    #[error("section norm vanishes on the grid (min {min:.3e}, max {max:.3e})")]
    SingularField { min: f64, max: f64 },

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {tol:.1e}")]
    NonHermitian { deviation: f64, tol: f64 },

    #[error("coupling s^2 = {s2:.6} violates the stability bound {bound:.6}")]
    BradlowViolation { s2: f64, bound: f64 },

    #[error("invalid (genus, degree) pair: {0}")]
    InvalidGenusDegree(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
