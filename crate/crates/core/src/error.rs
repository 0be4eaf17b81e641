use thiserror::Error;

/// Errors surfaced by solvers, analyzers, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The feasible set `{ z : ||A z - y||_2 <= eta }` is provably empty.
    #[error("infeasible problem: distance from y to the range of A exceeds eta by {excess:e}")]
    Infeasible {
        /// How far the residual floor sits above `eta`.
        excess: f64,
    },

    /// An input file or stream could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
