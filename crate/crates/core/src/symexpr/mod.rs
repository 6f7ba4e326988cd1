//! Scalar expressions in chart coordinates: construction, parsing,
//! differentiation, evaluation and the seeded sampling oracle.

mod expr;
mod parse;
mod poly;
mod sample;

pub use expr::{Expr, Node};
pub use parse::parse;
pub use poly::Poly;
pub use sample::{equal_on_samples, CoordBox, Oracle, Point, SampleOutcome};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("missing variable `{0}`")]
    MissingVariable(String),
    #[error("domain error: {message} at {at}")]
    DomainError { message: String, at: String },
    #[error("parse error at offset {offset}: {message}")]
    ParseError { offset: usize, message: String },
    #[error("invalid sampling request: {0}")]
    InvalidRequest(String),
}

#[cfg(test)]
mod tests;
