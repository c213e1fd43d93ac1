//! Exact scalar, polynomial and rational-function arithmetic.
//!
//! Everything in the crate is built on [`Rational`], an arbitrary precision
//! fraction kept in lowest terms with a positive denominator.

pub mod linalg;
mod poly;
mod ratfunc;
pub mod rational;

pub use poly::{poly_arith, poly_roots_rational, PolyOp, Polynomial};
pub use ratfunc::{PartialFraction, RationalFunction, SimplePole};
pub use linalg::null_space;
pub use rational::{parse_rational, Rational};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
    #[error("pole at x = {0}")]
    Pole(String),
    #[error("denominator does not split into rational linear factors")]
    NotSplit,
    #[error("coefficient too large for the rational root sieve")]
    SieveTooLarge,
}
