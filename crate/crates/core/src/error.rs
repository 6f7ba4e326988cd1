use thiserror::Error;

use crate::cartan::CartanError;
use crate::symexpr::ExprError;

/// Errors raised by the gerbe, Lie 2-algebra and butterfly layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error("simplicial depth {0} exceeds the supported maximum of 4")]
    DepthExceeded(usize),
    #[error("{what} does not glue on overlap {overlap:?} (residual {residual:e} at {witness})")]
    GluingMismatch { what: String, overlap: Vec<usize>, residual: f64, witness: String },
    #[error("3-curvature differs from the plectic form on chart {chart} (residual {residual:e})")]
    CurvatureMismatch { chart: usize, residual: f64 },
    #[error("element is not in the kernel of sigma (residual {0:e})")]
    NotInKernel(f64),
    #[error("no Hamiltonian vector field: {0}")]
    NoHamiltonianField(String),
    #[error("exactness of the butterfly wing cannot be checked without registered witnesses")]
    UnsupportedExactnessCheck,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degree error: {0}")]
    DegreeError(String),
    #[error("precondition `{hypothesis}` failed (residual {residual:e})")]
    PreconditionFailed { hypothesis: String, residual: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
