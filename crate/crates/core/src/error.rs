use thiserror::Error;

/// Errors produced by estimation and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Fewer arms than the operation supports.
    #[error("need at least {min} arms, got {found}")]
    TooFewArms { found: usize, min: usize },

    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The full variance estimator has no degrees of freedom left.
    #[error("variance undefined at k = {k} under the k-3 convention; use KMinus1")]
    VarianceUndefined { k: usize },

    /// Inputs are degenerate for the requested fit (e.g. zero variance).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The quadrature grid does not cover the posterior support.
    #[error("posterior grid too coarse: boundary mass {mass:.3e} exceeds 1e-6")]
    GridTooCoarse { mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
