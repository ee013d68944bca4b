use freespec_sdp::SdpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pencil is not monic")]
    NotMonic,
    #[error("variable count mismatch: {0} vs {1}")]
    VariableCountMismatch(usize, usize),
    #[error("basis columns are not orthonormal (error {0:.2e})")]
    NotOrthonormal(f64),
    #[error("subspace is not invariant (error {0:.2e})")]
    NotInvariant(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("expected a univariate pencil, got {0} variables")]
    NotUnivariate(usize),
    #[error("polynomial degree {deg} exceeds bound {bound}")]
    DegreeTooHigh { deg: i64, bound: i64 },
    #[error("functional is not symmetric (error {0:.2e})")]
    NotSymmetricFunctional(f64),
    #[error("eigenvalue clusters are ambiguous after reseeding")]
    ClusterAmbiguous,
    #[error("no verified counterexample found")]
    SearchFailed,
    #[error("solver stalled: {0}")]
    SolverStalled(String),
    #[error("unresolved: {0}")]
    Unresolved(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by floating point rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SolverStalled(_)
                | Error::Unresolved(_)
                | Error::ClusterAmbiguous
                | Error::SearchFailed
                | Error::Sdp(SdpError::NumericalBreakdown(_))
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
