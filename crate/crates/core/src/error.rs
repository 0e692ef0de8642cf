use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series failed to converge within its term budget.
    #[error("{routine} did not converge after {terms} terms")]
    NonConvergence { routine: &'static str, terms: usize },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    /// Work estimate exceeds the configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// An object is in the wrong state for the requested transition.
    #[error("state error: {0}")]
    State(String),

    /// Malformed serialized payload.
    #[error("format error: {0}")]
    Format(String),

    /// A time integration produced a non-finite value.
    #[error("divergence at node {node} (t = {time})")]
    Divergence { node: usize, time: f64 },

    /// The level crossing could not be bracketed on the grid.
    #[error("front tracking failed: {0}")]
    Tracking(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
