use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field has non-zero mean {mean:e} (norm {norm:e})")]
    NonZeroMean { mean: f64, norm: f64 },
    #[error("argument {value} outside the admissible range (-1, 1)")]
    OutOfRange { value: f64 },
    #[error("regularized potential requested without epsilon")]
    MissingEpsilon,
    #[error("invalid potential parameters: {0}")]
    InvalidPotential(String),
    #[error("no root of the minimizer equation: theta must be below theta0")]
    NoRoot,
    #[error("coefficient must be strictly positive (min {min:e})")]
    NotPositiveCoefficient { min: f64 },
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("Newton iteration diverged at t = {t} after {iterations} iterations (residual {residual:e}); try a smaller dt")]
    NewtonDiverged {
        t: f64,
        iterations: usize,
        residual: f64,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("negative input: {0}")]
    NegativeInput(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
