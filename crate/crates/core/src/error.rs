use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input is outside its allowed domain.
    #[error("invalid {name} = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// The requested operating point cannot exist (e.g. AR below the base fraction).
    #[error("infeasible {name} = {value}: {reason}")]
    Infeasible {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A target success rate or uplift the response curve cannot deliver.
    #[error("unreachable target {name} = {target}: attainable limit is {limit}")]
    Unreachable {
        name: &'static str,
        target: f64,
        limit: f64,
    },
    #[error("no intrinsic success rate stored for domain `{domain}` and RDI focus `{rdi}`")]
    MissingDomainEntry { domain: String, rdi: String },
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    /// Series-level validation failure (missing deflator, duplicate year, ...).
    #[error("invalid series: {0}")]
    Series(String),
}
