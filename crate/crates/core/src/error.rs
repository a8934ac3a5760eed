use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("statistic is undefined on this histogram: {0}")]
    UndefinedStatistic(String),
    #[error("statistic not supported here: {0}")]
    UnsupportedStatistic(String),
    #[error("infinite sensitivity: {0}")]
    InfiniteSensitivity(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn invalid_param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid_param(format!("{name} must be finite, got {v}"))
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        invalid_param(format!("{name} must be positive, got {v}"))
    }
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        invalid_param(format!("{name} must lie in [0, 1], got {v}"))
    }
}
