use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The candidate is not dominated by the nominal (Σ⁻¹ − Σ̂⁻¹ not positive
    /// definite, or σ̂ < σ), so the RVD between them is infinite.
    #[error("dominance violation: {0}")]
    DominanceViolation(String),

    #[error("support violation: f_P > 0 but f_Phat = 0 at {point:?}")]
    SupportViolation { point: Vec<f64> },

    #[error("{0} has no closed form for this pair of distributions")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("RVD fit infeasible: search region excludes sigma_hat >= {max_sigma}")]
    InfeasibleDominance { max_sigma: f64 },

    #[error("scenario program infeasible; blocking constraints: {blocking:?}")]
    Infeasible { blocking: Vec<String> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
