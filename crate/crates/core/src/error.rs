use thiserror::Error;

/// Errors raised by the numerical routes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfiError {
    #[error("{what} is not Hermitian (relative Frobenius defect {defect:.3e})")]
    NonHermitian { what: String, defect: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("{what} did not converge (achieved residual {residual:.3e})")]
    Convergence { what: String, residual: f64 },

    #[error("dimension {dim} exceeds the resource cap of {cap}")]
    Resource { dim: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state is not normalized (norm = {0:.15})")]
    NotNormalized(f64),

    #[error("internal consistency: QFI evaluated to {value:.3e}, below the round-off floor")]
    NegativeQfi { value: f64 },

    #[error("|Z| = {0:.3e} is too small to take a logarithm")]
    LogDomain(f64),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("unsupported state: {0}")]
    UnsupportedState(String),

    #[error("trajectory diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("{} trajectories diverged (first indices: {:?})", .indices.len(), &.indices[..(.indices.len().min(8))])]
    SampleDivergence { indices: Vec<usize> },

    #[error("no classical branch found: {0}")]
    NoBranch(String),

    #[error("caustic: endpoint Jacobian |dq_f/dp_i| = {jacobian:.3e}")]
    Caustic { jacobian: f64 },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
}

impl QfiError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QfiError::InvalidInput(msg.into())
    }

    /// True for failures of an iterative refinement (maps to CLI exit code 3).
    pub fn is_convergence(&self) -> bool {
        matches!(self, QfiError::Convergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, QfiError>;
