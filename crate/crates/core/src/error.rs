use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite exponent in {what} (value {value})")]
    Overflow { what: &'static str, value: f64 },

    #[error("unstable dynamics: net damping {gamma_down} <= 0")]
    Stability { gamma_down: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// Small-angle or dilute-stream assumptions violated beyond the hard limit.
    #[error("physics validity: {0}")]
    Validity(String),

    #[error("pair state is not positive semidefinite: eigenvalue {eigenvalue}")]
    InvalidWeights { eigenvalue: f64 },

    #[error("Fock truncation inadequate: p[{n_max}] = {tail:e} exceeds {limit:e}")]
    Truncation { n_max: usize, tail: f64, limit: f64 },

    #[error("internal consistency check failed: {what} = {value:e}")]
    Consistency { what: &'static str, value: f64 },

    #[error(
        "oracle did not converge: first-half mean {first_half}, second-half mean {second_half}, \
         allowed drift {tolerance:e}"
    )]
    Convergence {
        first_half: f64,
        second_half: f64,
        tolerance: f64,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
