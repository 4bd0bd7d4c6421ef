use alloc::vec;
use alloc::vec::Vec;

use super::{check_state, check_step_size, StepResult, Stepper};
use crate::hamiltonian::apply_inverse_mass;
use crate::numeric::newton::converged;
use crate::numeric::{newton_solve, Dual, Matrix, NewtonConfig, NonlinearSystem};
use crate::{Error, ExtendedState, HamiltonianSystem, Monitor, PoincareSystem};

const MIN_MONITOR: f64 = 1e-14;

/// Adaptive symplectic Euler-B on `H̄`: implicit in `p̄₁`, explicit in `q̄₁`,
/// with `pᵗ₁ = pᵗ₀` assigned.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EulerB {
    pub newton: NewtonConfig,
}

impl EulerB {
    pub fn new(newton: NewtonConfig) -> Self {
        Self { newton }
    }
}

impl<H: HamiltonianSystem, M: Monitor> Stepper<H, M> for EulerB {
    fn name(&self) -> &'static str {
        "euler-b"
    }

    fn step(&self, sys: &PoincareSystem<H, M>, x0: &ExtendedState, h: f64) -> Result<StepResult, Error> {
        euler_b_adaptive_step(sys, x0, h, &self.newton)
    }

    fn fictive_step_for(
        &self,
        sys: &PoincareSystem<H, M>,
        x0: &ExtendedState,
        dt: f64,
    ) -> Option<Result<f64, Error>> {
        if sys.base.inverse_mass().is_some() && sys.monitor.p_independent() {
            Some(sys.monitor_value(&x0.q, &x0.p, x0.pt).map(|g| dt / g))
        } else {
            None
        }
    }
}

fn guard_monitor(sys: &PoincareSystem<impl HamiltonianSystem, impl Monitor>, g: f64, x0: &ExtendedState) -> Result<(), Error> {
    if g < MIN_MONITOR {
        return Err(Error::positivity(sys.monitor.name(), g, &x0.q, &x0.p, x0.pt));
    }
    Ok(())
}

/// One step of symplectic Euler-B on the extended Hamiltonian:
/// `p̄₁ = p̄₀ − h ∂H̄/∂q̄(q̄₀, p̄₁)`, `q̄₁ = q̄₀ + h ∂H̄/∂p̄(q̄₀, p̄₁)`.
///
/// Separable systems with position-only monitors use the closed-form
/// Jacobian `I + h ∇g (M⁻¹p₁)ᵀ`, inverted by Sherman–Morrison; other
/// combinations differentiate `∂H̄/∂q` in `p` with dual numbers.
pub fn euler_b_adaptive_step<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    x0: &ExtendedState,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult, Error> {
    check_step_size(h)?;
    check_state(sys, x0)?;
    match sys.base.inverse_mass() {
        Some(minv) if sys.monitor.p_independent() => separable_step(sys, minv, x0, h, cfg),
        _ => generic_step(sys, x0, h, cfg),
    }
}

fn separable_step<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    minv: &Matrix,
    x0: &ExtendedState,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult, Error> {
    let n = x0.dim();
    let zeros = vec![0.0; n];
    let potential = sys.base.energy(&x0.q, &zeros)?;
    let mut grad_v = vec![0.0; n];
    let mut unused = vec![0.0; n];
    sys.base.gradient(&x0.q, &zeros, &mut grad_v, &mut unused)?;
    let mut grad_g = vec![0.0; n];
    let (g, _) = sys.monitor_partials(&x0.q, &x0.p, x0.pt, &mut grad_g, &mut unused)?;
    guard_monitor(sys, g, x0)?;

    // p₁ = a − h ∇g (½ p₁ᵀM⁻¹p₁ + c)
    let a: Vec<f64> = (0..n).map(|i| x0.p[i] - h * g * grad_v[i]).collect();
    let c = potential + x0.pt;
    let mut p1 = a.clone();
    let mut u = vec![0.0; n];
    let mut iterations = 0;
    if grad_g.iter().any(|&v| v != 0.0) {
        p1.copy_from_slice(&x0.p);
        let mut r = vec![0.0; n];
        let mut previous = f64::INFINITY;
        loop {
            apply_inverse_mass(minv, &p1, &mut u);
            let e = 0.5 * dot(&p1, &u) + c;
            for i in 0..n {
                r[i] = p1[i] - a[i] + h * grad_g[i] * e;
            }
            let norm = crate::numeric::norm2(&r);
            if converged(norm, previous, cfg.tolerance) || (iterations == cfg.max_iterations && norm <= cfg.tolerance) {
                break;
            }
            previous = norm;
            if !norm.is_finite() || iterations == cfg.max_iterations {
                return Err(Error::NotConverged {
                    iterations,
                    residual_norm: norm,
                });
            }
            let denom = 1.0 + h * dot(&u, &grad_g);
            if denom.abs() <= 1e-14 {
                return Err(Error::SingularMatrix);
            }
            let ur = dot(&u, &r) / denom;
            for i in 0..n {
                p1[i] -= r[i] - h * grad_g[i] * ur;
            }
            iterations += 1;
        }
    }
    apply_inverse_mass(minv, &p1, &mut u);
    let q1: Vec<f64> = (0..n).map(|i| x0.q[i] + h * g * u[i]).collect();
    let qt1 = x0.qt + h * g;
    finish(x0, q1, qt1, p1, h, iterations, g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn finish(
    x0: &ExtendedState,
    q1: Vec<f64>,
    qt1: f64,
    p1: Vec<f64>,
    h: f64,
    newton_iterations: usize,
    g: f64,
) -> Result<StepResult, Error> {
    let state = ExtendedState {
        q: q1,
        qt: qt1,
        p: p1,
        pt: x0.pt,
    };
    if !state.is_finite() {
        return Err(Error::NonFinite("euler-b step"));
    }
    Ok(StepResult {
        h_physical: state.qt - x0.qt,
        state,
        h_fictive: h,
        newton_iterations,
        monitor_value: g,
    })
}

struct MomentumResidual<'a, H, M> {
    sys: &'a PoincareSystem<H, M>,
    x0: &'a ExtendedState,
    h: f64,
}

impl<H: HamiltonianSystem, M: Monitor> NonlinearSystem for MomentumResidual<'_, H, M> {
    fn dim(&self) -> usize {
        self.x0.dim()
    }

    fn residual(&mut self, p1: &[f64], out: &mut [f64]) -> Result<(), Error> {
        let d = self.sys.partials(&self.x0.q, p1, self.x0.pt)?;
        for i in 0..p1.len() {
            out[i] = p1[i] - self.x0.p[i] + self.h * d.dq[i];
        }
        Ok(())
    }

    fn jacobian(&mut self, p1: &[f64], _fd_step: f64, jac: &mut Matrix) -> Result<(), Error> {
        let n = p1.len();
        let qd: Vec<Dual<f64>> = self.x0.q.iter().map(|&v| Dual::constant(v)).collect();
        let mut pd: Vec<Dual<f64>> = p1.iter().map(|&v| Dual::constant(v)).collect();
        let ptd = Dual::constant(self.x0.pt);
        for j in 0..n {
            pd[j].du = 1.0;
            let d = self.sys.partials(&qd, &pd, ptd)?;
            pd[j].du = 0.0;
            for i in 0..n {
                jac[(i, j)] = if i == j { 1.0 } else { 0.0 } + self.h * d.dq[i].du;
            }
        }
        Ok(())
    }
}

fn generic_step<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    x0: &ExtendedState,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult, Error> {
    let g0 = sys.monitor_value(&x0.q, &x0.p, x0.pt)?;
    guard_monitor(sys, g0, x0)?;
    let mut residual = MomentumResidual { sys, x0, h };
    let sol = newton_solve(&mut residual, &x0.p, cfg)?;
    let d = sys.partials(&x0.q, &sol.x, x0.pt)?;
    let q1 = (0..x0.dim()).map(|i| x0.q[i] + h * d.dp[i]).collect();
    let qt1 = x0.qt + h * d.dpt;
    finish(x0, q1, qt1, sol.x, h, sol.iterations, g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::symplectic_euler_b_step;
    use crate::monitors::{energy_lagrangian_monitor, PowerMonitor, UnitMonitor};
    use crate::poincare::init_extended;
    use crate::problems::{HarmonicOscillator, KeplerProblem};

    #[test]
    fn oscillator_unit_monitor() {
        let sys = PoincareSystem::new(HarmonicOscillator::new(1).unwrap(), UnitMonitor);
        let x0 = init_extended(&sys.base, &[1.0], &[0.0], 0.0).unwrap();
        let s = euler_b_adaptive_step(&sys, &x0, 0.1, &NewtonConfig::default()).unwrap();
        assert!((s.state.p[0] + 0.1).abs() < 1e-15);
        assert!((s.state.q[0] - 0.99).abs() < 1e-15);
        assert!((s.state.qt - 0.1).abs() < 1e-15);
        assert_eq!(s.state.pt, -0.5);
    }

    #[test]
    fn reduces_to_classical() {
        let k = KeplerProblem::new(0.5).unwrap();
        let sys = PoincareSystem::new(k.clone(), UnitMonitor);
        let s0 = k.initial_state();
        let mut x = init_extended(&k, &s0.q, &s0.p, 0.0).unwrap();
        let mut base = s0.clone();
        for _ in 0..1000 {
            x = euler_b_adaptive_step(&sys, &x, 0.01, &NewtonConfig::default()).unwrap().state;
            base = symplectic_euler_b_step(&k, &base, 0.01).unwrap();
            for i in 0..2 {
                assert!((x.q[i] - base.q[i]).abs() <= 1e-12);
                assert!((x.p[i] - base.p[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn kepler_power_physical_step() {
        let k = KeplerProblem::new(0.9).unwrap();
        let sys = PoincareSystem::new(k.clone(), PowerMonitor::new(1.0).unwrap());
        let s0 = k.initial_state();
        let x0 = init_extended(&k, &s0.q, &s0.p, 0.0).unwrap();
        let s = euler_b_adaptive_step(&sys, &x0, 0.01, &NewtonConfig::default()).unwrap();
        assert!((s.h_physical - 1e-4).abs() < 1e-17);
        assert_eq!(s.state.pt, x0.pt);
    }

    fn check_implicit_equations<M: Monitor>(sys: &PoincareSystem<KeplerProblem, M>, x0: &ExtendedState, h: f64) {
        let s = euler_b_adaptive_step(sys, x0, h, &NewtonConfig::default()).unwrap();
        let d = sys.partials(&x0.q, &s.state.p, x0.pt).unwrap();
        for i in 0..2 {
            assert!((s.state.p[i] - (x0.p[i] - h * d.dq[i])).abs() < 1e-11);
            assert!((s.state.q[i] - (x0.q[i] + h * d.dp[i])).abs() < 1e-13);
        }
        assert!((s.state.qt - (x0.qt + h * d.dpt)).abs() < 1e-13);
        assert_eq!(s.state.pt, x0.pt);
    }

    #[test]
    fn satisfies_implicit_equations() {
        let k = KeplerProblem::new(0.6).unwrap();
        let x0 = ExtendedState::new(vec![0.5, 0.3], 1.0, vec![-0.4, 1.1], 0.45).unwrap();
        check_implicit_equations(&PoincareSystem::new(k.clone(), PowerMonitor::new(1.0).unwrap()), &x0, 0.05);
        let energy = energy_lagrangian_monitor(k.clone()).bounded(1e-3, 4.0).unwrap();
        check_implicit_equations(&PoincareSystem::new(k, energy), &x0, 0.05);
    }

    #[test]
    fn zero_step_is_identity() {
        let k = KeplerProblem::new(0.6).unwrap();
        let sys = PoincareSystem::new(k.clone(), PowerMonitor::new(1.0).unwrap());
        let x0 = ExtendedState::new(vec![0.5, 0.3], 1.0, vec![-0.4, 1.1], 0.45).unwrap();
        let s = euler_b_adaptive_step(&sys, &x0, 0.0, &NewtonConfig::default()).unwrap();
        assert_eq!(s.state, x0);
    }

    #[test]
    fn degenerate_monitor_aborts() {
        let k = KeplerProblem::new(0.6).unwrap();
        let sys = PoincareSystem::new(k, PowerMonitor::new(1.0).unwrap());
        let x0 = ExtendedState::new(vec![1e-8, 0.0], 0.0, vec![0.0, 1.0], 0.5).unwrap();
        let err = euler_b_adaptive_step(&sys, &x0, 0.1, &NewtonConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Positivity { .. }));
    }
}
