use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the domain of the function ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {field} = {value} ({expected})")]
    InvalidConfig {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("insufficient conditioning samples: {count} < {required}")]
    InsufficientSamples { count: u64, required: u64 },

    #[error("quadrature did not converge after {intervals} subintervals (error estimate {error_estimate:e})")]
    QuadratureNotConverged {
        intervals: usize,
        error_estimate: f64,
    },

    #[error("output error: {0}")]
    Output(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}
