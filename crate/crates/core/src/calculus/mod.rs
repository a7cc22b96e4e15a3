//! Truncated Taylor-jet arithmetic.
//!
//! Every derivative in the crate is taken by evaluating an expression on
//! [`Jet`]s: seed the variables, run the ordinary arithmetic, read the
//! coefficients back. No finite differences are involved.

mod jet;

pub use jet::{extract, seed, Jet, JetSpace, MAX_ORDER, MAX_VARS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order {0} outside the supported range 1..=4")]
    OrderOutOfRange(usize),
    #[error("seed needs at least one value")]
    NoVariables,
    #[error("{0} seed variables exceed the supported maximum")]
    TooManyVariables(usize),
    #[error("multi-index of total degree {degree} exceeds jet order {order}")]
    DegreeExceedsOrder { degree: usize, order: usize },
    #[error("multi-index {0:?} does not fit the jet's variables")]
    BadMultiIndex(Vec<u8>),
    #[error("division by a jet with zero constant term")]
    DivisionByZero,
    #[error("{op} needs a positive constant term, got {value}")]
    NonPositive { op: &'static str, value: f64 },
}

/// Scalars that metric and field expressions can be evaluated over.
///
/// Implemented by `f64` (plain evaluation) and [`Jet`] (evaluation with
/// derivatives). The `checked_*` methods reject arguments outside the
/// smooth domain of the operation instead of producing NaN.
pub trait Scalar:
    Clone
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::Add<f64, Output = Self>
    + std::ops::Mul<f64, Output = Self>
{
    /// A constant compatible with `self` (same jet space for jets).
    fn konst(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn checked_div(&self, rhs: &Self) -> Result<Self, JetError>;
    fn checked_sqrt(&self) -> Result<Self, JetError>;
    fn checked_ln(&self) -> Result<Self, JetError>;
    fn checked_powf(&self, p: f64) -> Result<Self, JetError>;
    fn powi(&self, n: i32) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
}

impl Scalar for f64 {
    fn konst(&self, c: f64) -> f64 {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn checked_div(&self, rhs: &f64) -> Result<f64, JetError> {
        if *rhs == 0.0 {
            Err(JetError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
    fn checked_sqrt(&self) -> Result<f64, JetError> {
        if *self > 0.0 {
            Ok(f64::sqrt(*self))
        } else {
            Err(JetError::NonPositive {
                op: "sqrt",
                value: *self,
            })
        }
    }
    fn checked_ln(&self) -> Result<f64, JetError> {
        if *self > 0.0 {
            Ok(f64::ln(*self))
        } else {
            Err(JetError::NonPositive {
                op: "log",
                value: *self,
            })
        }
    }
    fn checked_powf(&self, p: f64) -> Result<f64, JetError> {
        if p.fract() == 0.0 {
            if p < 0.0 && *self == 0.0 {
                return Err(JetError::DivisionByZero);
            }
            return Ok(f64::powi(*self, p as i32));
        }
        if *self > 0.0 {
            Ok(f64::powf(*self, p))
        } else {
            Err(JetError::NonPositive {
                op: "power",
                value: *self,
            })
        }
    }
    fn powi(&self, n: i32) -> f64 {
        f64::powi(*self, n)
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
}

impl Scalar for Jet {
    fn konst(&self, c: f64) -> Jet {
        Jet::konst(self, c)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn checked_div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        Jet::checked_div(self, rhs)
    }
    fn checked_sqrt(&self) -> Result<Jet, JetError> {
        Jet::checked_sqrt(self)
    }
    fn checked_ln(&self) -> Result<Jet, JetError> {
        Jet::checked_ln(self)
    }
    fn checked_powf(&self, p: f64) -> Result<Jet, JetError> {
        Jet::checked_powf(self, p)
    }
    fn powi(&self, n: i32) -> Jet {
        Jet::powi(self, n)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn sin(&self) -> Jet {
        Jet::sin(self)
    }
    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
}
