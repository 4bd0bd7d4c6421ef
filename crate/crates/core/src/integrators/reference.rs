use alloc::vec;
use alloc::vec::Vec;

use super::{check_step_size, StepResult, Stepper};
use crate::hamiltonian::apply_inverse_mass;
use crate::{Error, ExtendedState, HamiltonianSystem, Monitor, PhaseState, PoincareSystem, SeparableHamiltonian};

fn check_finite(h: f64) -> Result<(), Error> {
    if !h.is_finite() {
        return Err(Error::NonFinite("step size"));
    }
    Ok(())
}

fn grad_v<H: SeparableHamiltonian>(sys: &H, q: &[f64]) -> Result<Vec<f64>, Error> {
    let mut g = vec![0.0; q.len()];
    sys.potential_gradient(q, &mut g)?;
    Ok(g)
}

/// Leapfrog: half kick, drift, half kick.
pub fn stormer_verlet_step<H: SeparableHamiltonian>(sys: &H, s: &PhaseState, h: f64) -> Result<PhaseState, Error> {
    check_finite(h)?;
    let n = s.dim();
    let g0 = grad_v(sys, &s.q)?;
    let p_half: Vec<f64> = (0..n).map(|i| s.p[i] - 0.5 * h * g0[i]).collect();
    let mut v = vec![0.0; n];
    apply_inverse_mass(sys.inverse_mass_matrix(), &p_half, &mut v);
    let q: Vec<f64> = (0..n).map(|i| s.q[i] + h * v[i]).collect();
    let g1 = grad_v(sys, &q)?;
    let p = (0..n).map(|i| p_half[i] - 0.5 * h * g1[i]).collect();
    Ok(PhaseState { q, p })
}

/// Classical fixed-step symplectic Euler-B: `p₁ = p₀ − h∇V(q₀)`, `q₁ = q₀ + hM⁻¹p₁`.
pub fn symplectic_euler_b_step<H: SeparableHamiltonian>(sys: &H, s: &PhaseState, h: f64) -> Result<PhaseState, Error> {
    check_finite(h)?;
    let n = s.dim();
    let g = grad_v(sys, &s.q)?;
    let p: Vec<f64> = (0..n).map(|i| s.p[i] - h * g[i]).collect();
    let mut v = vec![0.0; n];
    apply_inverse_mass(sys.inverse_mass_matrix(), &p, &mut v);
    let q = (0..n).map(|i| s.q[i] + h * v[i]).collect();
    Ok(PhaseState { q, p })
}

/// Explicit Euler on `(q, p)`; not symplectic.
pub fn explicit_euler_step<H: HamiltonianSystem>(sys: &H, s: &PhaseState, h: f64) -> Result<PhaseState, Error> {
    check_finite(h)?;
    let n = s.dim();
    let mut dq = vec![0.0; n];
    let mut dp = vec![0.0; n];
    sys.gradient(&s.q, &s.p, &mut dq, &mut dp)?;
    Ok(PhaseState {
        q: (0..n).map(|i| s.q[i] + h * dp[i]).collect(),
        p: (0..n).map(|i| s.p[i] - h * dq[i]).collect(),
    })
}

/// Explicit Euler on the extended field, with `pᵗ` untouched. A
/// non-symplectic control for the Jacobian tests.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExplicitEuler;

impl<H: HamiltonianSystem, M: Monitor> Stepper<H, M> for ExplicitEuler {
    fn name(&self) -> &'static str {
        "explicit-euler"
    }

    fn step(&self, sys: &PoincareSystem<H, M>, x0: &ExtendedState, h: f64) -> Result<StepResult, Error> {
        check_step_size(h)?;
        let g = sys.monitor_value(&x0.q, &x0.p, x0.pt)?;
        let (qd, pd) = sys.extended_vector_field(x0)?;
        let n = x0.dim();
        let state = ExtendedState {
            q: (0..n).map(|i| x0.q[i] + h * qd[i]).collect(),
            qt: x0.qt + h * qd[n],
            p: (0..n).map(|i| x0.p[i] + h * pd[i]).collect(),
            pt: x0.pt,
        };
        Ok(StepResult {
            h_physical: state.qt - x0.qt,
            state,
            h_fictive: h,
            newton_iterations: 0,
            monitor_value: g,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{FreeParticle, HarmonicOscillator, KeplerProblem};

    #[test]
    fn verlet_free_particle_is_exact() {
        let f = FreeParticle::new(2).unwrap();
        let s = PhaseState::new(vec![1.0, 2.0], vec![-0.5, 0.25]).unwrap();
        let s1 = stormer_verlet_step(&f, &s, 0.4).unwrap();
        assert_eq!(s1.q, vec![0.8, 2.1]);
        assert_eq!(s1.p, s.p);
    }

    #[test]
    fn verlet_oscillator_hand_values() {
        let o = HarmonicOscillator::new(1).unwrap();
        let s = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
        let s1 = stormer_verlet_step(&o, &s, 0.1).unwrap();
        assert!((s1.q[0] - 0.995).abs() < 1e-15);
        assert!((s1.p[0] + 0.09975).abs() < 1e-15);
    }

    #[test]
    fn verlet_reversible() {
        let k = KeplerProblem::new(0.6).unwrap();
        let s = PhaseState::new(vec![0.7, -0.2], vec![0.3, 1.1]).unwrap();
        let fwd = stormer_verlet_step(&k, &s, 0.01).unwrap();
        let back = stormer_verlet_step(&k, &fwd, -0.01).unwrap();
        for i in 0..2 {
            assert!((back.q[i] - s.q[i]).abs() <= 1e-14);
            assert!((back.p[i] - s.p[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn explicit_euler_oscillator() {
        let o = HarmonicOscillator::new(1).unwrap();
        let s = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
        let s1 = explicit_euler_step(&o, &s, 0.1).unwrap();
        assert_eq!(s1.q, vec![1.0]);
        assert_eq!(s1.p, vec![-0.1]);
    }
}
