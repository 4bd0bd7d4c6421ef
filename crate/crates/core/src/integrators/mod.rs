//! One-step maps on the extended system and the trajectory driver.

mod driver;
mod euler_b;
mod htvi;
mod quadrature;
mod reference;
pub mod symplectic;
mod taylor;

pub use driver::{
    integrate, integrate_collect, integrate_fixed, DriveSummary, FixedMethod, StepRecord,
    Trajectory, DEFAULT_STEP_BUDGET,
};
pub use euler_b::{euler_b_adaptive_step, EulerB};
pub use htvi::{htvi_discrete_hamiltonian, htvi_step, Htvi, HtviScheme};
pub use quadrature::Quadrature;
pub use reference::{
    explicit_euler_step, stormer_verlet_step, symplectic_euler_b_step, ExplicitEuler,
};
pub use taylor::{taylor_coefficients, taylor_flow};

use crate::{Error, ExtendedState, HamiltonianSystem, Monitor, PoincareSystem};

/// Outcome of one step of a fictive-time integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: ExtendedState,
    /// Fictive step `Δτ`.
    pub h_fictive: f64,
    /// Physical step `qᵗ₁ − qᵗ₀`.
    pub h_physical: f64,
    pub newton_iterations: usize,
    /// Monitor value at the start of the step.
    pub monitor_value: f64,
}

/// A one-step map of the extended system with fictive step `h`.
pub trait Stepper<H, M> {
    fn name(&self) -> &'static str;

    fn step(
        &self,
        sys: &PoincareSystem<H, M>,
        x0: &ExtendedState,
        h: f64,
    ) -> Result<StepResult, Error>;

    /// Fictive step that advances `qᵗ` by exactly `dt`, when it has a closed
    /// form. `None` makes the driver search for it numerically.
    fn fictive_step_for(
        &self,
        _sys: &PoincareSystem<H, M>,
        _x0: &ExtendedState,
        _dt: f64,
    ) -> Option<Result<f64, Error>> {
        None
    }
}

pub(crate) fn check_step_size(h: f64) -> Result<(), Error> {
    if !h.is_finite() || h < 0.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "step size must be finite and non-negative, got {h}"
        )));
    }
    Ok(())
}

pub(crate) fn check_state<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    x: &ExtendedState,
) -> Result<(), Error> {
    if x.dim() != sys.dim() || x.p.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}
