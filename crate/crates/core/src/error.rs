use thiserror::Error;

/// Errors raised by the numerical library.
///
/// `InvalidConfig` is reserved for user-supplied parameters that violate a
/// documented invariant; everything else is a numerical or domain failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conformal time eta = {eta} is outside the background domain: {reason}")]
    Domain { eta: f64, reason: &'static str },

    #[error("singular point of the Psi-transform at eta = {eta}: {reason}")]
    SingularPoint { eta: f64, reason: &'static str },

    #[error("{0}")]
    InvalidConfig(String),

    #[error("supercurvature wave number (k^2 - K = {kappa2} with K = {curvature}): acoustic behaviour requires real k with k^2 - K > 0")]
    Supercurvature { curvature: i32, kappa2: f64 },

    #[error("step size underflow at eta = {last_eta} (last accepted point)")]
    StepSizeUnderflow { last_eta: f64 },

    #[error("maximum number of integrator steps exceeded at eta = {last_eta}")]
    TooManySteps { last_eta: f64 },

    #[error("not implemented: {0}")]
    Unsupported(String),

    #[error("invalid grid: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
