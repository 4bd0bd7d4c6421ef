//! Finite-difference symplecticity checks at sampled states.

use std::f64::consts::TAU;

use poincare_vi::integrators::symplectic::{extended_defect, reduced_defect};
use poincare_vi::integrators::{EulerB, ExplicitEuler, Htvi, Stepper};
use poincare_vi::monitors::UnitMonitor;
use poincare_vi::{AnyMonitor, ExtendedState, HamiltonianSystem, PoincareSystem, Problem};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{IntegratorKind, RunConfig};
use crate::error::{HarnessError, Result};
use crate::run::{build_monitor, build_problem};

pub const DEFAULT_SEED: u64 = 0x5eed_2017;
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticityReport {
    pub samples: usize,
    /// Max defect of the `(2n + 2)`-dimensional map.
    pub extended: f64,
    /// Max defect of the `2n`-dimensional map at fixed `qᵗ`, `pᵗ`.
    pub reduced: f64,
    /// Max defect of explicit Euler at the same states.
    pub control: f64,
}

impl SymplecticityReport {
    pub fn render(&self) -> String {
        format!(
            "samples,extended_defect,reduced_defect,control_defect\n{},{:.3e},{:.3e},{:.3e}\n",
            self.samples, self.extended, self.reduced, self.control
        )
    }
}

/// States on the reference orbit at seeded random times, the start point
/// first, each with `pᵗ = −H` and `qᵗ` set to its time.
pub fn sample_states(problem: &Problem, samples: usize, seed: u64) -> Result<Vec<ExtendedState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|k| {
            let (t, s) = if k == 0 {
                (0.0, problem.initial_state())
            } else {
                let t = rng.random_range(0.0..TAU);
                (t, problem.reference_state(t))
            };
            let energy = problem.energy(&s.q, &s.p)?;
            Ok(ExtendedState::new(s.q, t, s.p, -energy)?)
        })
        .collect()
}

fn max_defects<St>(
    sys: &PoincareSystem<Problem, AnyMonitor<Problem>>,
    stepper: &St,
    states: &[ExtendedState],
    h: f64,
) -> Result<(f64, f64)>
where
    St: Stepper<Problem, AnyMonitor<Problem>>,
{
    let (mut ext, mut red) = (0.0f64, 0.0f64);
    for x in states {
        ext = ext.max(extended_defect(sys, stepper, x, h, FD_STEP)?);
        red = red.max(reduced_defect(sys, stepper, x, h, FD_STEP)?);
    }
    Ok((ext, red))
}

/// One-step symplecticity defects of the configured adaptive integrator.
/// `h = 0` is accepted and checks the identity map.
pub fn symplecticity(cfg: &RunConfig, samples: usize, seed: u64) -> Result<SymplecticityReport> {
    if samples == 0 {
        return Err(HarnessError::config("need at least one sample"));
    }
    let mut probe = cfg.clone();
    if cfg.h == 0.0 {
        probe.h = 1.0;
    }
    probe.validate()?;
    let problem = build_problem(cfg)?;
    let monitor = build_monitor(&probe, &problem)?;
    let sys = PoincareSystem::new(problem.clone(), monitor);
    let states = sample_states(&problem, samples, seed)?;
    let (extended, reduced) = match cfg.integrator {
        IntegratorKind::EulerB => max_defects(&sys, &EulerB::default(), &states, cfg.h)?,
        IntegratorKind::Htvi4 => max_defects(&sys, &Htvi::htvi4(), &states, cfg.h)?,
        other => {
            return Err(HarnessError::config(format!(
                "symplecticity checks need an adaptive integrator (euler-b or htvi4), got {other}"
            )))
        }
    };
    let control_sys = PoincareSystem::new(problem, UnitMonitor);
    let mut control = 0.0f64;
    for x in &states {
        control = control.max(reduced_defect(&control_sys, &ExplicitEuler, x, cfg.h, FD_STEP)?);
    }
    Ok(SymplecticityReport {
        samples,
        extended,
        reduced,
        control,
    })
}
