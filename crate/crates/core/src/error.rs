use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("Wishart degrees of freedom {dof} smaller than dimension {dim}")]
    DofTooSmall { dof: f64, dim: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("design matrix is singular (n = {n}, p = {p})")]
    SingularDesign { n: usize, p: usize },

    #[error(
        "target moments lie on the boundary of the moment space; pseudo-true parameter diverges"
    )]
    MomentOnBoundary,

    #[error("Newton iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Gibbs iteration {iteration}: {source}")]
    Gibbs {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cell {cell}, replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        cell: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips `Gibbs`/`Replicate` context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Gibbs { source, .. } | Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }
}
