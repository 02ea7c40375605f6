use thiserror::Error;

/// Errors raised by the library.
///
/// The variants fall into three families that the CLI maps to distinct exit
/// codes: invalid input (bad distributions, out-of-range parameters, bad
/// codewords), resource limits, and internal invariant violations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{}", delta_message(*.delta, *.upper))]
    DeltaOutOfRange { delta: f64, upper: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid codeword: {0}")]
    InvalidCodeword(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidDistribution(msg.into())
    }
}

fn delta_message(delta: f64, upper: f64) -> String {
    if upper <= 0.0 {
        format!("delta = {delta} is not admissible: the delta range is empty because the source is uniform")
    } else {
        format!("delta = {delta} is outside the admissible open interval (0, {upper})")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
