use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Failure modes of a monitor function evaluation.
///
/// `Unbounded` means `g` tends to `+∞` at the point (a vanishing denominator),
/// `Vanishing` means `g` tends to `0`. The bounding transform maps these to
/// its upper and lower limits respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorError {
    Unbounded,
    Vanishing,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A jet or dual evaluation produced NaN or infinity.
    NonFiniteDerivative,
    /// A Hamiltonian or monitor evaluated to a non-finite value.
    NonFinite(&'static str),
    /// Newton iteration hit its iteration cap.
    NotConverged { iterations: usize, residual_norm: f64 },
    SingularMatrix,
    DimensionMismatch { expected: usize, found: usize },
    InvalidArgument(String),
    /// The monitor function is not positive at `state` (packed `q, p, pᵗ`).
    Positivity {
        monitor: &'static str,
        value: f64,
        state: Vec<f64>,
    },
    /// Collision or other coordinate singularity of the potential.
    Singularity(&'static str),
    /// The trajectory driver ran out of its step budget.
    StepBudgetExceeded { budget: u64, time: f64 },
    /// A single step failed inside the driver.
    StepFailed {
        step: u64,
        time: f64,
        source: Box<Error>,
    },
    /// A step did not advance physical time.
    TimeNotAdvancing { h_physical: f64 },
    /// The per-step observer asked the driver to stop.
    Interrupted,
}

impl Error {
    pub(crate) fn positivity(monitor: &'static str, value: f64, q: &[f64], p: &[f64], pt: f64) -> Self {
        let mut state = Vec::with_capacity(q.len() + p.len() + 1);
        state.extend_from_slice(q);
        state.extend_from_slice(p);
        state.push(pt);
        Error::Positivity {
            monitor,
            value,
            state,
        }
    }

    /// Innermost cause, looking through `StepFailed` wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::StepFailed { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteDerivative => write!(f, "non-finite derivative"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::NotConverged {
                iterations,
                residual_norm,
            } => write!(
                f,
                "newton iteration did not converge after {iterations} iterations (residual norm {residual_norm:e})"
            ),
            Error::SingularMatrix => write!(f, "singular matrix"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Positivity {
                monitor,
                value,
                state,
            } => write!(
                f,
                "monitor `{monitor}` is not positive (g = {value:e}) at state (q, p, pt) = {state:?}"
            ),
            Error::Singularity(what) => write!(f, "singularity: {what}"),
            Error::StepBudgetExceeded { budget, time } => {
                write!(f, "step budget of {budget} exceeded at t = {time}")
            }
            Error::StepFailed { step, time, source } => {
                write!(f, "step {step} failed at t = {time}: {source}")
            }
            Error::TimeNotAdvancing { h_physical } => {
                write!(f, "physical time did not advance (step {h_physical:e})")
            }
            Error::Interrupted => write!(f, "integration interrupted by observer"),
        }
    }
}

impl core::error::Error for Error {}

impl fmt::Display for MonitorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonitorError::Unbounded => write!(f, "monitor is unbounded"),
            MonitorError::Vanishing => write!(f, "monitor vanishes"),
        }
    }
}
