//! Exact sparse multivariate polynomials over the rationals.
//!
//! Every polynomial lives in a [`VarContext`], an ordered list of named
//! variables tagged with a [`VarClass`]. Terms are stored in a map keyed by
//! [`Monomial`], whose `Ord` is graded reverse lexicographic with the first
//! variable of the context largest. Zero coefficients are never stored, so two
//! polynomials over the same context are equal iff their term maps are equal.

mod context;
mod monomial;
mod parse;
mod polymap;
mod poly;

pub use context::{VarClass, VarContext};
pub use monomial::Monomial;
pub use parse::{parse_poly, ParseError};
pub use polymap::{compose, compose_one, PolyMap};
pub use poly::{coefficient_map, coefficients_wrt, Polynomial};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Shorthand for an integer-valued [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("polynomials live in different variable contexts")]
    ContextMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid variable context: {0}")]
    InvalidContext(String),
    #[error("map has {got} components but the context has {expected} program variables")]
    MapArity { expected: usize, got: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
