//! Exact arithmetic layer: rationals, polynomials, rational functions and
//! tail sign decisions.

pub mod poly;
pub mod ratfunc;
pub mod rational;
pub mod tail;

pub use poly::Polynomial;
pub use ratfunc::{DetKind, RationalFunction};
pub use rational::Rational;
pub use tail::{poly_tail_nonneg, ratfunc_tail_sign, SignClass, TailCheck};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator polynomial is identically zero")]
    ZeroDenominator,
    #[error("pole at n = {0}")]
    Pole(String),
    #[error("polynomial division is not exact")]
    InexactDivision,
    #[error("malformed rational literal `{0}`")]
    BadLiteral(String),
}
