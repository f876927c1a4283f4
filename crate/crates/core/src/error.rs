use alloc::string::String;

/// Errors reported by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },
    #[error("matrix is not positive semidefinite: pivot {index} is {value:e}")]
    NotPositiveSemidefinite { index: usize, value: f64 },
    #[error("invalid grid: {0}")]
    Grid(&'static str),
    #[error("exponent {exponent} exceeds the overflow cap {cap}; check time units")]
    Overflow { exponent: f64, cap: f64 },
    #[error("volatility series diverges from term {term}; beta is outside the validity region")]
    SeriesDivergence { term: usize },
    #[error("QMC budget of {points} points exhausted (estimate {estimate:e}, error {error:e})")]
    QmcBudget { points: usize, estimate: f64, error: f64 },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("observation history does not cover [{from}, {to}]")]
    MissingHistory { from: f64, to: f64 },
    #[error("conditional variance {0:e} is negative beyond tolerance")]
    NegativeVariance(f64),
    #[error("{0}")]
    Data(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
