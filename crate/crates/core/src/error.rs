use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polynomial of degree {degree} exceeds the maximal representable degree {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("scaling violated at grid point x = {x}: |lam * b(x)| = {value} > 1")]
    ScalingViolation { x: f64, value: f64 },

    #[error("sequence is not nonincreasing: member {k} exceeds its predecessor at x = {x}")]
    NonMonotone { k: usize, x: f64 },

    #[error("pointwise infimum not reached at x = {x}: smallest member value {value} exceeds {tol}")]
    InfimumNotReached { x: f64, value: f64, tol: f64 },

    #[error("point {x} lies outside the sampled domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("sequence exhausted: final maximum {final_max} still exceeds eps = {eps}")]
    SequenceExhausted { final_max: f64, eps: f64 },

    #[error("weight is not proper on the window: boundary value {boundary_value} at x = {x} does not exceed {threshold}")]
    NotProper { x: f64, boundary_value: f64, threshold: f64 },

    #[error("generators do not separate grid points {x} and {y}")]
    SeparationFailure { x: f64, y: f64 },

    #[error("all generators vanish at grid point {x}")]
    Vanishing { x: f64 },

    #[error("lattice construction exceeded the node budget of {budget}")]
    NodeBudgetExceeded { budget: usize },

    #[error("matrix is not positive semidefinite: pivot {index} is {pivot}")]
    NotPositiveSemidefinite { index: usize, pivot: f64 },

    #[error("level {level} out of range (maximum {max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("invalid recurrence: beta[{index}] = {value} is not positive")]
    InvalidRecurrence { index: usize, value: f64 },

    #[error("moment s_{index} = {value} is not positive")]
    NonPositiveMoment { index: usize, value: f64 },

    #[error("insufficient moments: need {needed}, have {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("strict convergence routes disagree: definition = {via_definition}, corollary = {via_corollary}")]
    EquivalenceViolated {
        via_definition: bool,
        via_corollary: bool,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed json: {0}")]
    Json(String),
}

impl Error {
    /// Failures of the numerics or environment, as opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::EquivalenceViolated { .. }
                | Error::NodeBudgetExceeded { .. }
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
