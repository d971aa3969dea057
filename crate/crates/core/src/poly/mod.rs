//! Multivariate polynomial arithmetic over exact rationals or floating
//! scalars: monomial orders, long division, evaluation, Jacobians and a small
//! text format.

mod coeff;
mod monomial;
pub(crate) mod ordered;
mod polynomial;
mod system;
mod text;

pub use coeff::{rational_approx, rational_to_f64, Coeff, Rational, FLOAT_ZERO};
pub use monomial::{Monomial, MonomialOrder};
pub use polynomial::{Polynomial, Ring};
pub use system::{CompiledSystem, PolySystem};
pub use text::{parse_polynomial, parse_system};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("operands belong to different polynomial rings")]
    RingMismatch,
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid monomial order: {0}")]
    InvalidOrder(String),
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("polynomial is not univariate in the requested variable")]
    NotUnivariate,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Polynomial with exact rational coefficients.
pub type QPoly = Polynomial<Rational>;
