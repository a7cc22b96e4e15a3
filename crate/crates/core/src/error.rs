use thiserror::Error;

use crate::calculus::JetError;
use crate::metrics::expr::ParseError;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("in {field}: {source}")]
    Parse {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("quadratic form is not symmetric at entry ({0}, {1})")]
    NonSymmetric(usize, usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("{0} lies outside the metric domain")]
    Domain(String),
    #[error("fundamental tensor is degenerate (condition number {condition:e})")]
    Degenerate { condition: f64 },
    #[error("degenerate flag: denominator {denominator:e} below tolerance {threshold:e}")]
    DegenerateFlag { denominator: f64, threshold: f64 },
    #[error("integration left the metric domain at t = {t}")]
    DomainExit { t: f64 },
    #[error("integration step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("could not draw a domain sample for {metric} after {attempts} attempts")]
    Sampling { metric: String, attempts: usize },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
