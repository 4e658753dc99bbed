use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// Result would not fit in a double.
    #[error("overflow in {func} at x = {x}")]
    Overflow { func: &'static str, x: f64 },

    /// The susceptibility was evaluated on a pole of the real axis.
    #[error("susceptibility pole at z = {z}")]
    Pole { z: String },

    /// Model parameters are out of range.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The oscillatory integral did not reach tolerance within the panel budget,
    /// or the acceleration table diverged.
    #[error("no convergence after {half_periods} half-periods (value {value:e}, error estimate {err_estimate:e})")]
    NonConvergence {
        value: f64,
        err_estimate: f64,
        half_periods: usize,
    },

    /// The observable is infinite for this model; the reason says which limit diverges.
    #[error("observable diverges: {0}")]
    DivergentObservable(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("non-positive value {value} at t = {t}; log-log fit needs positive data")]
    NonPositiveValues { t: f64, value: f64 },

    #[error("degenerate Gaussian: correlation coefficient rho^2 = {rho_sq}")]
    DegenerateGaussian { rho_sq: f64 },
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { func, msg: msg.into() }
    }
}
