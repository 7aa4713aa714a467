use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("offspring pmf sums to {sum}, expected 1")]
    PmfNotNormalized { sum: f64 },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("series truncation degrees differ ({left} vs {right})")]
    TruncationMismatch { left: usize, right: usize },
    #[error("fixed-point iteration did not converge after {iterations} steps (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("operation not available for the {0} family")]
    UnsupportedFamily(&'static str),
    #[error("no critical value exists: {0}")]
    NoCriticalValue(String),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("{censored_frac:.4} of replicates exceeded the node budget")]
    BudgetDominated { censored_frac: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
