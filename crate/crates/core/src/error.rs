use thiserror::Error;

/// Errors raised by the solvers and model validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CasError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("observation z={z} has zero probability under input x={x}")]
    ZeroProbabilityObservation { x: usize, z: usize },

    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),

    #[error("distortion {requested} is below the minimum achievable {minimum}")]
    UnreachableDistortion { requested: f64, minimum: f64 },

    #[error("sensing prior covariance is singular; its inverse is required")]
    SingularPrior,

    #[error("objective is not finite ({0})")]
    NonFiniteObjective(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, CasError>;
