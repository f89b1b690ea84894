use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state rejected by problem: {0}")]
    Inadmissible(String),

    #[error("Newton iteration did not converge after {iters} iterations (residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("singular Jacobian (pivot {pivot:e}, scale {scale:e})")]
    SingularJacobian { pivot: f64, scale: f64 },

    #[error("interval {interval} failed: {source}")]
    IntervalFailed {
        interval: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the root cause is a failed nonlinear solve.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::SingularJacobian { .. } => true,
            Error::IntervalFailed { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
