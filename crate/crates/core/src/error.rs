use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("singular closed form at level {level}: (n+1) f^2(n+1) = 0")]
    SingularFormula { level: usize },

    #[error("ground-state detection probability {probability:e} is below the floor {floor:e}")]
    UnmeasurableOutcome { probability: f64, floor: f64 },

    #[error("integrator norm drift {drift:e} at level {level}; use a smaller dt")]
    StepSize { level: usize, drift: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Mandel Q is undefined for a field with zero mean photon number")]
    UndefinedMandel,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
