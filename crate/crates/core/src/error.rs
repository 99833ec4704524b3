use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pulse sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    /// The target state lies (numerically) in the span of the alternatives.
    #[error("states are linearly dependent: smallest Gram eigenvalue {min_eigenvalue:e} is below {floor:e}")]
    LinearDependence { min_eigenvalue: f64, floor: f64 },

    #[error("infeasible regime: {0}")]
    Infeasible(String),

    #[error("optimization failed: {0}")]
    OptimizationFailure(String),

    #[error("vacuous bound: {0}")]
    VacuousBound(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) | Error::VacuousBound(_) => 3,
            _ => 2,
        }
    }
}
