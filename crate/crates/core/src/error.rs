use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} lies outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("map is not differentiable at t = {0}")]
    NonDifferentiable(f64),

    #[error("structural validation failed: {0}")]
    Structure(String),

    #[error("conjugacy table is not strictly increasing at node {0}")]
    Degenerate(usize),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("chart pole at t = {0}")]
    Pole(f64),

    #[error("orbit degenerates at step {index}: {reason}")]
    OrbitDegeneracy { index: usize, reason: &'static str },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("point lies on the local stable manifold of the saddle (x1 = 0)")]
    StableManifold,

    #[error("zero distance to the critical set")]
    InfiniteRecurrence,

    #[error("fiber point is outside the solid torus, projection undefined")]
    ProjectionUndefined,

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
