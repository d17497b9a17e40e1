use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("algebraic loop is singular (1 + D_plant*D_controller = 0)")]
    SingularLoop,

    #[error("dc gain undefined: transfer function has a pole at the origin")]
    PoleAtOrigin,

    #[error("pair is not controllable: controllability matrix rank {rank} < {n}")]
    Uncontrollable { rank: usize, n: usize },

    #[error("Riccati iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
