//! Variable time-step symplectic integration of Hamiltonian systems through
//! the Poincaré time transformation.
//!
//! The transformed Hamiltonian `H̄ = g(q, p) · (H(q, p) + pᵗ)` lives on an
//! extended phase space that carries physical time `qᵗ` and its conjugate
//! momentum `pᵗ`. Integrating it with a fixed fictive step `h` produces
//! physical steps `dt ≈ h · g`, so the monitor function `g` drives the
//! adaptivity while the discrete map stays symplectic.
//!
//! Crate layout:
//!
//! * [`numeric`]: scalar abstraction, dual numbers, truncated Taylor jets,
//!   dense linear solves and Newton iteration.
//! * [`hamiltonian`]: the [`HamiltonianSystem`] contract and [`PhaseState`].
//! * [`poincare`]: the extended system, its vector field and degeneracy
//!   diagnostics.
//! * [`monitors`]: monitor functions `g` and the step-bounding transform.
//! * [`integrators`]: adaptive symplectic Euler-B, Hamiltonian Taylor
//!   variational integrators (HTVI), fixed-step references and the
//!   trajectory driver.
//! * [`problems`]: Kepler two-body, harmonic oscillator and free particle
//!   with analytic derivatives and reference solutions.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::assign_op_pattern)]

extern crate alloc;

mod error;
pub mod hamiltonian;
pub mod integrators;
pub mod monitors;
pub mod numeric;
pub mod poincare;
pub mod problems;

pub use error::{Error, MonitorError};
pub use hamiltonian::{HamiltonianSystem, PhaseState, SeparableHamiltonian};
pub use monitors::{AnyMonitor, Monitor};
pub use numeric::{Dual, Jet, Matrix, NewtonConfig, Scalar};
pub use poincare::{ExtendedState, PoincareSystem};
pub use problems::Problem;
