use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("inconsistent branch data: phi(a, b) = {phi_ab}, sqrt(2 sigma) = {expected}")]
    Inconsistent { phi_ab: f64, expected: f64 },

    #[error("{0} did not converge within {1} iterations")]
    NoConvergence(&'static str, usize),

    #[error("could not bracket a sign change for {0}")]
    Bracket(&'static str),

    #[error("1 - u fell below {guard:e} at t = {time}")]
    Singularity { time: f64, guard: f64 },

    #[error("explicit step unstable at t = {time}: sup-norm grew from {before} to {after}")]
    Unstable { time: f64, before: f64, after: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
