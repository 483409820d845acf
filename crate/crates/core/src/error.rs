//! Crate-wide error type.

use core::fmt;

/// Errors reported by the matrix algebra, flow evaluations, and the
/// integrator.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands have incompatible orders.
    DimensionMismatch { left: usize, right: usize },
    /// A coordinate vector does not have triangular length `n(n+1)/2`.
    NotTriangularLength(usize),
    /// An operator expected to be positive semi-definite has a
    /// significantly negative eigenvalue.
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    /// A matrix expected to be invertible is numerically singular.
    Singular,
    /// The input fails the idempotence/self-adjointness checks required
    /// of an orthogonal projector.
    NotAProjector { defect: f64 },
    /// A linear system has no solution within tolerance.
    InconsistentSystem { residual: f64 },
    /// The QL iteration failed to converge.
    EigenNoConvergence,
    /// A monitor denominator vanishes (zero spectrum or diagonal
    /// reference matrix).
    ZeroDenominator(&'static str),
    /// A parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// The step size controller collapsed below the resolution limit.
    StepUnderflow { t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::NotTriangularLength(len) => {
                write!(f, "length {len} is not a triangular number n(n+1)/2")
            }
            Error::NotPositiveSemidefinite { min_eigenvalue } => {
                write!(f, "operator is not PSD: min eigenvalue {min_eigenvalue:e}")
            }
            Error::Singular => write!(f, "matrix is numerically singular"),
            Error::NotAProjector { defect } => {
                write!(f, "input is not an orthogonal projector (defect {defect:e})")
            }
            Error::InconsistentSystem { residual } => {
                write!(f, "linear system is inconsistent (residual {residual:e})")
            }
            Error::EigenNoConvergence => write!(f, "eigenvalue iteration did not converge"),
            Error::ZeroDenominator(what) => write!(f, "zero denominator: {what}"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::StepUnderflow { t } => {
                write!(f, "step size underflow at t = {t} (problem too stiff)")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
