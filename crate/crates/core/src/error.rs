use thiserror::Error;

/// Errors raised by the analytic evaluators, the simulator and the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a precondition. The message names it.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series did not reach its tolerance within the term budget.
    #[error("{what} did not converge after {terms} terms (last partial sum {partial_sum:e})")]
    Convergence {
        what: &'static str,
        terms: usize,
        partial_sum: f64,
    },

    /// Quadrature refinement hit its level limit.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    /// A simulated path exceeded `max_steps` before reaching its boundary.
    #[error("path {path} truncated after {steps} steps")]
    Truncated { path: u64, steps: u64 },

    /// The boundary point at infinity has no finite half-plane coordinate.
    #[error("boundary angle pi/2 maps to the point at infinity")]
    PointAtInfinity,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Returns a domain error unless `cond` holds.
pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}
