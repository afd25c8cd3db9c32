use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::volterra::Boundary;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors from the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    Domain { op: &'static str, detail: String },
    /// Input that is well-typed but violates a documented invariant.
    InvalidInput { what: &'static str, detail: String },
    /// Function values at the bracket ends do not change sign.
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// An iterative method hit its iteration cap.
    Convergence { op: &'static str, iterations: usize },
    /// A function evaluation produced NaN or an infinity.
    NonFinite { op: &'static str, at: f64 },
    /// The improper normal prior (`r0 = 0`) evaluated at `r = 0`.
    Singular { detail: String },
    /// A backward solver failed at a particular grid step.
    SolverStep { step: usize, time: f64, source: Box<Error> },
    /// Fixed-point iteration did not reach its tolerance; carries the last iterate.
    FixedPointNotConverged { iterations: usize, last_change: f64, last: Box<Boundary> },
    /// A mapped time falls outside the solved grid.
    OutOfRange { requested: f64, available: f64, hint: &'static str },
    /// A dense grid would exceed the configured memory budget.
    Resource { required_bytes: u64, budget_bytes: u64 },
    /// The requested combination is not supported.
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidInput { what, detail: detail.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { op, detail } => write!(f, "{op}: argument outside domain: {detail}"),
            Error::InvalidInput { what, detail } => write!(f, "invalid {what}: {detail}"),
            Error::Bracket { lo, hi, f_lo, f_hi } => write!(
                f,
                "no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})"
            ),
            Error::Convergence { op, iterations } => {
                write!(f, "{op}: no convergence after {iterations} iterations")
            }
            Error::NonFinite { op, at } => write!(f, "{op}: non-finite value at {at}"),
            Error::Singular { detail } => write!(f, "singular input: {detail}"),
            Error::SolverStep { step, time, source } => {
                write!(f, "solver failed at step {step} (t = {time}): {source}")
            }
            Error::FixedPointNotConverged { iterations, last_change, .. } => write!(
                f,
                "fixed-point iteration stopped after {iterations} iterations with sup-change {last_change}"
            ),
            Error::OutOfRange { requested, available, hint } => write!(
                f,
                "time {requested} lies outside the solved range (limit {available}); {hint}"
            ),
            Error::Resource { required_bytes, budget_bytes } => write!(
                f,
                "grid needs {required_bytes} bytes, budget is {budget_bytes} bytes"
            ),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::SolverStep { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
