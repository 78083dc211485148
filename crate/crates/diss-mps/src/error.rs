use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dense cap exceeded: {0}")]
    CapExceeded(String),
    #[error("integration step too coarse: {0}")]
    StepTooCoarse(String),
    #[error("quadrature too coarse: rates shifted by {0:e} on doubling")]
    QuadratureTooCoarse(f64),
    #[error("exponential fit failed: {0}")]
    FitFailed(String),
    #[error("chain too short for this operation: {0}")]
    ChainTooShort(String),
    #[error("invalid scaling model: {0}")]
    InvalidModel(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("operator is not a projector: eigenvalue {0} outside {{0,1}}")]
    NotProjector(f64),
    #[error("jump-set construction failed: coverage rank {got} < {want}")]
    ConstructionFailed { got: usize, want: usize },
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),
    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
