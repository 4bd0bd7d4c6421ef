//! Scalar types, jets, dense linear algebra and Newton iteration.

mod dual;
mod jet;
mod linalg;
pub(crate) mod newton;
mod scalar;

pub use dual::Dual;
pub use jet::{jet_lift, Jet, ScalarField, MAX_ORDER};
pub use linalg::{solve_linear, Matrix};
pub use newton::{
    central_difference_jacobian, newton_solve, FnSystem, NewtonConfig, NewtonSolution,
    NonlinearSystem,
};
pub use scalar::{dot, norm2, Scalar};
