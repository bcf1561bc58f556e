//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Failures reported by constructors and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input argument violates a documented precondition.
    InvalidInput(String),
    /// A field contains NaN or an infinity at the given node.
    NonFinite { index: usize },
    /// An iterative method stopped before reaching its tolerance.
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    /// A root or minimum could not be bracketed.
    NotBracketed {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    /// The truncated cylinder is too short: boundary values are not flat.
    DomainTooShort { left_defect: f64, right_defect: f64 },
    /// A converged front violates monotonicity or the range `[0, 1]`.
    ShapeViolation {
        monotonicity_defect: f64,
        range_defect: f64,
    },
    /// A direct factorization met a zero pivot.
    SingularMatrix { row: usize },
    /// A sequence expected to be monotone is not.
    NotMonotone { index: usize, jump: f64 },
    /// An internal consistency check failed.
    Check(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite { index } => write!(f, "non-finite value at node {index}"),
            Error::NoConvergence {
                what,
                iterations,
                residual,
            } => write!(
                f,
                "{what} did not converge after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::NotBracketed {
                what,
                lo,
                hi,
                f_lo,
                f_hi,
            } => write!(
                f,
                "{what}: not bracketed on [{lo}, {hi}] (values {f_lo:.6e}, {f_hi:.6e})"
            ),
            Error::DomainTooShort {
                left_defect,
                right_defect,
            } => write!(
                f,
                "domain too short: |U(x_min)-1| = {left_defect:.3e}, |U(x_max)| = {right_defect:.3e}"
            ),
            Error::ShapeViolation {
                monotonicity_defect,
                range_defect,
            } => write!(
                f,
                "front shape violated: monotonicity defect {monotonicity_defect:.3e}, range defect {range_defect:.3e}"
            ),
            Error::SingularMatrix { row } => write!(f, "zero pivot at row {row}"),
            Error::NotMonotone { index, jump } => {
                write!(f, "sequence not monotone at entry {index} (jump {jump:.3e})")
            }
            Error::Check(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
