//! Error type shared by all pipeline stages.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A Cholesky pivot fell below the positive-definiteness tolerance.
    #[error("matrix is not positive definite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// Positive-definiteness failure of the Gram matrix phi(J(w)), i.e. phi
    /// is not strictly positive on the support of the weight.
    #[error("phi(J(w)) is not positive definite (pivot {pivot:.3e} at index {index}); phi must be positive on supp(w)")]
    PhiNotPositive { index: usize, pivot: f64 },

    /// A banded operation would read rows beyond the exact leading section.
    #[error("truncation overflow: operation needs rows up to {needed} but only {exact} are exact")]
    TruncationOverflow { needed: usize, exact: usize },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("quadrature failure: symmetric eigensolver did not converge")]
    QuadratureFailure,

    /// Curve validation failed: phi sampled non-positive for an m = 2 curve.
    #[error("invalid curve: phi({x}) = {value:.6e} is not positive")]
    CurveInvalid { x: f64, value: f64 },

    #[error("index error: {0}")]
    IndexError(String),

    #[error("point ({x}, {y}) is off the curve: |y^m - phi(x)| = {residual:.3e}")]
    PointOffCurve { x: f64, y: f64, residual: f64 },

    /// A closed-form normalizer vanished; phi behaves like a lower-degree
    /// polynomial for this weight.
    #[error("degenerate curve: normalizer {value:.3e} below 1e-13 at column ({n}, {k})")]
    Degenerate { n: usize, k: usize, value: f64 },

    /// Lanczos normalizer collapsed while orthogonalizing column (n, k).
    #[error("Lanczos breakdown at degree {n}, column {k}: normalizer {value:.3e}")]
    LanczosBreakdown { n: usize, k: usize, value: f64 },

    /// The monomial Gram matrix is too ill-conditioned for the oracle.
    #[error("oracle infeasible: Gram condition estimate {cond:.3e} exceeds 1e12")]
    OracleInfeasible { cond: f64 },

    #[error("section too small: {0}")]
    SectionTooSmall(String),

    #[error("numerical check failed: {0}")]
    NumericalCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
