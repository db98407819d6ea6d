use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypergeometric series did not converge after {terms} terms (z = {z})")]
    NonConvergence { terms: usize, z: f64 },

    #[error("kernel is singular at s = 0; use interior quadrature nodes")]
    Singularity,

    #[error("matrix is not positive definite: pivot {index} = {pivot:e} below tolerance {tol:e}")]
    NotPositiveDefinite { index: usize, pivot: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tol:e}")]
    NotPsd { eigenvalue: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("horizon mismatch: {0} vs {1}")]
    HorizonMismatch(f64, f64),

    #[error("quadrature schemes disagree: {a} vs {b} (relative {rel:e} > {tol:e})")]
    Quadrature { a: f64, b: f64, rel: f64, tol: f64 },

    #[error("measure not supported here: {0}")]
    UnsupportedMeasure(String),

    #[error("measure ordering violated at s = {s}: component {component} has mass where component {prev} vanishes")]
    MeasureOrdering { s: f64, component: usize, prev: usize },

    #[error("singular value decomposition failed at node s = {0}")]
    Svd(f64),

    #[error("correlation {0} outside [-1, 1]")]
    Correlation(f64),

    #[error("time grid too coarse: {0} steps (need at least 8)")]
    GridTooCoarse(usize),

    #[error("path {path} exploded at step {step} (|x| = {value:e})")]
    Explosion { path: usize, step: usize, value: f64 },

    #[error("diffusion coefficient is not positive at x = {0}")]
    NonPositiveDiffusion(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("golden value '{0}' has no registry entry")]
    MissingGolden(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the failure is a validation problem (bad input) rather than a
    /// numerical one. The CLI maps these to different exit codes.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Dimension(_)
                | Error::HorizonMismatch(..)
                | Error::UnsupportedMeasure(_)
                | Error::MeasureOrdering { .. }
                | Error::Correlation(_)
                | Error::GridTooCoarse(_)
                | Error::Invalid(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
