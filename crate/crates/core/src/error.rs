use thiserror::Error;

pub type Result<T> = std::result::Result<T, GncError>;

#[derive(Debug, Error)]
pub enum GncError {
    #[error("network must have at least one node")]
    EmptyNetwork,
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("network has no edges (mean degree is zero)")]
    NoEdges,
    #[error("disconnected ({0} components)")]
    Disconnected(usize),
    #[error("symmetric eigensolver did not converge")]
    EigenNoConvergence,
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate residual covariance: {0}")]
    DegenerateCovariance(String),
    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("GCV denominator degenerate at alpha = {0}")]
    DegenerateGcv(f64),
    #[error("k-means produced an empty cluster after {0} retries")]
    EmptyCluster(usize),
    #[error("true support is empty; TPR undefined")]
    EmptyTruth,
    #[error("true support is complete; FPR undefined")]
    FullTruth,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl GncError {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GncError::EigenNoConvergence
                | GncError::DegenerateCovariance(_)
                | GncError::NotPositiveDefinite(_)
                | GncError::Singular(_)
                | GncError::DegenerateGcv(_)
                | GncError::EmptyCluster(_)
        )
    }
}
