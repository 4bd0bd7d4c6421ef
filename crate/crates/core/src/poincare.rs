//! The Poincaré-transformed system `H̄ = g(q, p, pᵗ) · (H(q, p) + pᵗ)` on
//! extended phase space.

use alloc::vec;
use alloc::vec::Vec;

use crate::hamiltonian::momentum_hessian;
use crate::numeric::{Dual, Matrix, Scalar};
use crate::{Error, HamiltonianSystem, Monitor, MonitorError, PhaseState};

/// Extended point `(q̄, p̄) = ((q, qᵗ), (p, pᵗ))`.
///
/// Packed as `[q₁ … qₙ, qᵗ, p₁ … pₙ, pᵗ]` wherever a flat vector is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub q: Vec<f64>,
    /// Physical time.
    pub qt: f64,
    pub p: Vec<f64>,
    /// Conjugate time momentum.
    pub pt: f64,
}

impl ExtendedState {
    pub fn new(q: Vec<f64>, qt: f64, p: Vec<f64>, pt: f64) -> Result<Self, Error> {
        let base = PhaseState::new(q, p)?;
        if !qt.is_finite() || !pt.is_finite() {
            return Err(Error::NonFinite("extended state"));
        }
        Ok(Self {
            q: base.q,
            qt,
            p: base.p,
            pt,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn base(&self) -> PhaseState {
        PhaseState {
            q: self.q.clone(),
            p: self.p.clone(),
        }
    }

    /// `q̄ = (q, qᵗ)`.
    pub fn q_bar(&self) -> Vec<f64> {
        let mut v = self.q.clone();
        v.push(self.qt);
        v
    }

    /// `p̄ = (p, pᵗ)`.
    pub fn p_bar(&self) -> Vec<f64> {
        let mut v = self.p.clone();
        v.push(self.pt);
        v
    }

    pub fn packed(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dim() + 2);
        v.extend_from_slice(&self.q);
        v.push(self.qt);
        v.extend_from_slice(&self.p);
        v.push(self.pt);
        v
    }

    /// Inverse of [`packed`](Self::packed); `z.len()` must be even and at least 4.
    pub fn from_packed(z: &[f64]) -> Result<Self, Error> {
        if z.len() < 4 || !z.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(alloc::format!(
                "packed extended state has invalid length {}",
                z.len()
            )));
        }
        let m = z.len() / 2;
        Self::new(z[..m - 1].to_vec(), z[m - 1], z[m..2 * m - 1].to_vec(), z[2 * m - 1])
    }

    pub fn is_finite(&self) -> bool {
        self.qt.is_finite() && self.pt.is_finite() && self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }
}

/// `((q₀, t₀), (p₀, −H(q₀, p₀)))`, which puts the state on the level set `H̄ = 0`.
pub fn init_extended<H: HamiltonianSystem>(
    sys: &H,
    q0: &[f64],
    p0: &[f64],
    t0: f64,
) -> Result<ExtendedState, Error> {
    let h0 = sys.energy(q0, p0)?;
    if !h0.is_finite() {
        return Err(Error::NonFinite("initial energy"));
    }
    ExtendedState::new(q0.to_vec(), t0, p0.to_vec(), -h0)
}

/// `H̄` together with its partial derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPartials<S> {
    pub value: S,
    /// Monitor value `g`.
    pub g: S,
    /// `H + pᵗ`.
    pub shifted_energy: S,
    pub dq: Vec<S>,
    pub dp: Vec<S>,
    /// `∂H̄/∂pᵗ`; `∂H̄/∂qᵗ` is identically zero.
    pub dpt: S,
}

/// Base system `H` with monitor `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSystem<H, M> {
    pub base: H,
    pub monitor: M,
}

impl<H: HamiltonianSystem, M: Monitor> PoincareSystem<H, M> {
    pub fn new(base: H, monitor: M) -> Self {
        Self { base, monitor }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Monitor value and partials, turning failures and non-positive values
    /// into [`Error::Positivity`].
    pub fn monitor_partials<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), Error> {
        let value = match self.monitor.evaluate(q, p, pt, grad_q, grad_p) {
            Ok((g, d)) if g.value() > 0.0 && g.is_finite() => return Ok((g, d)),
            Ok((g, _)) => g.value(),
            Err(MonitorError::Unbounded) => f64::INFINITY,
            Err(MonitorError::Vanishing) => 0.0,
        };
        let qv: Vec<f64> = q.iter().map(Scalar::value).collect();
        let pv: Vec<f64> = p.iter().map(Scalar::value).collect();
        Err(Error::positivity(self.monitor.name(), value, &qv, &pv, pt.value()))
    }

    /// `g` at an `f64` point.
    pub fn monitor_value(&self, q: &[f64], p: &[f64], pt: f64) -> Result<f64, Error> {
        let n = q.len();
        let mut gq = vec![0.0; n];
        let mut gp = vec![0.0; n];
        self.monitor_partials(q, p, pt, &mut gq, &mut gp).map(|(g, _)| g)
    }

    /// `H̄` and all its partials at `(q, ·, p, pᵗ)`.
    pub fn partials<S: Scalar>(&self, q: &[S], p: &[S], pt: S) -> Result<ExtendedPartials<S>, Error> {
        let n = q.len();
        let energy = self.base.energy(q, p)?;
        let mut dh_dq = vec![S::zero(); n];
        let mut dh_dp = vec![S::zero(); n];
        self.base.gradient(q, p, &mut dh_dq, &mut dh_dp)?;
        let mut gq = vec![S::zero(); n];
        let mut gp = vec![S::zero(); n];
        let (g, dg_dpt) = self.monitor_partials(q, p, pt, &mut gq, &mut gp)?;
        let e = energy + pt;
        let dq = (0..n).map(|i| gq[i] * e + g * dh_dq[i]).collect();
        let dp = (0..n).map(|i| gp[i] * e + g * dh_dp[i]).collect();
        Ok(ExtendedPartials {
            value: g * e,
            g,
            shifted_energy: e,
            dq,
            dp,
            dpt: g + dg_dpt * e,
        })
    }

    /// `H̄ = g · (H + pᵗ)`.
    pub fn extended_hamiltonian(&self, x: &ExtendedState) -> Result<f64, Error> {
        let energy = self.base.energy(&x.q, &x.p)?;
        let g = self.monitor_value(&x.q, &x.p, x.pt)?;
        Ok(g * (energy + x.pt))
    }

    /// Extended Hamilton's equations on a packed state `z = [q, qᵗ, p, pᵗ]`.
    ///
    /// `out[2n + 1]` (the `pᵗ` rate) is always exactly zero.
    pub fn vector_field_packed<S: Scalar>(&self, z: &[S], out: &mut [S]) -> Result<(), Error> {
        let n = self.dim();
        let (q, p, pt) = (&z[..n], &z[n + 1..2 * n + 1], z[2 * n + 1]);
        let d = self.partials(q, p, pt)?;
        out[..n].copy_from_slice(&d.dp);
        out[n] = d.dpt;
        for i in 0..n {
            out[n + 1 + i] = -d.dq[i];
        }
        out[2 * n + 1] = S::zero();
        Ok(())
    }

    /// `(q̄̇, p̄̇)` at `x`.
    pub fn extended_vector_field(&self, x: &ExtendedState) -> Result<(Vec<f64>, Vec<f64>), Error> {
        let n = self.dim();
        let mut out = vec![0.0; 2 * n + 2];
        self.vector_field_packed(&x.packed(), &mut out)?;
        let p_dot = out.split_off(n + 1);
        Ok((out, p_dot))
    }

    /// The `n × n` momentum block
    /// `(∂H/∂p)(∇_p g)ᵀ + g ∂²H/∂p² + (∇_p g)(∂H/∂p)ᵀ` and its determinant.
    pub fn degeneracy_block(&self, x: &ExtendedState) -> Result<(Matrix, f64), Error> {
        let n = self.dim();
        let mut dh_dq = vec![0.0; n];
        let mut dh_dp = vec![0.0; n];
        self.base.gradient(&x.q, &x.p, &mut dh_dq, &mut dh_dp)?;
        let mut gq = vec![0.0; n];
        let mut gp = vec![0.0; n];
        let (g, _) = self.monitor_partials(&x.q, &x.p, x.pt, &mut gq, &mut gp)?;
        let hpp = momentum_hessian(&self.base, &x.q, &x.p)?;
        let mut block = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                block[(i, j)] = dh_dp[i] * gp[j] + g * hpp[(i, j)] + gp[i] * dh_dp[j];
            }
        }
        let det = block.determinant();
        Ok((block, det))
    }

    /// Full `(n+1) × (n+1)` Hessian `∂²H̄/∂p̄²`, by forward differentiation of
    /// `∂H̄/∂p̄`.
    pub fn momentum_hessian(&self, x: &ExtendedState) -> Result<Matrix, Error> {
        let n = self.dim();
        let qd: Vec<Dual<f64>> = x.q.iter().map(|&v| Dual::constant(v)).collect();
        let mut pd: Vec<Dual<f64>> = x.p.iter().map(|&v| Dual::constant(v)).collect();
        let mut ptd = Dual::constant(x.pt);
        let mut hess = Matrix::zeros(n + 1, n + 1);
        for j in 0..=n {
            if j < n {
                pd[j].du = 1.0;
            } else {
                ptd.du = 1.0;
            }
            let d = self.partials(&qd, &pd, ptd)?;
            for i in 0..n {
                hess[(i, j)] = d.dp[i].du;
            }
            hess[(n, j)] = d.dpt.du;
            if j < n {
                pd[j].du = 0.0;
            } else {
                ptd.du = 0.0;
            }
        }
        Ok(hess)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitors::{AnyMonitor, PowerMonitor, UnitMonitor};
    use crate::problems::{HarmonicOscillator, KeplerProblem};
    use crate::numeric::Jet;
    use proptest::prelude::*;

    fn oscillator() -> HarmonicOscillator {
        HarmonicOscillator::new(1).unwrap()
    }

    #[test]
    fn init_oscillator() {
        let x = init_extended(&oscillator(), &[1.0], &[0.0], 0.0).unwrap();
        assert_eq!(x.q_bar(), vec![1.0, 0.0]);
        assert_eq!(x.p_bar(), vec![0.0, -0.5]);
    }

    #[test]
    fn init_kepler_pt() {
        let k = KeplerProblem::new(0.9).unwrap();
        let s = k.initial_state();
        let x = init_extended(&k, &s.q, &s.p, 0.0).unwrap();
        assert!((x.pt - 0.5).abs() < 1e-14);
    }

    #[test]
    fn init_zero_energy() {
        // H = ½(0² + 0²) = 0
        let x = init_extended(&oscillator(), &[0.0], &[0.0], 3.0).unwrap();
        assert_eq!(x.pt, 0.0);
        assert_eq!(x.qt, 3.0);
    }

    #[test]
    fn hamiltonian_examples() {
        let sys = PoincareSystem::new(oscillator(), PowerMonitor::new(1.0).unwrap());
        let x0 = init_extended(&sys.base, &[0.7], &[0.3], 0.0).unwrap();
        assert_eq!(sys.extended_hamiltonian(&x0).unwrap(), 0.0);
        let x = ExtendedState::new(vec![1.0], 0.0, vec![0.0], 0.0).unwrap();
        assert_eq!(sys.extended_hamiltonian(&x).unwrap(), 0.5);
        let unit = PoincareSystem::new(oscillator(), UnitMonitor);
        let x = ExtendedState::new(vec![0.4], 1.0, vec![-0.2], 0.25).unwrap();
        let h = 0.5 * (0.16 + 0.04);
        assert!((unit.extended_hamiltonian(&x).unwrap() - (h + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn vector_field_examples() {
        let x = ExtendedState::new(vec![1.0], 0.0, vec![0.0], -0.5).unwrap();
        let unit = PoincareSystem::new(oscillator(), UnitMonitor);
        let (qd, pd) = unit.extended_vector_field(&x).unwrap();
        assert_eq!(qd, vec![0.0, 1.0]);
        assert_eq!(pd, vec![-1.0, 0.0]);

        let power = PoincareSystem::new(oscillator(), PowerMonitor::new(1.0).unwrap());
        let (qd, pd) = power.extended_vector_field(&x).unwrap();
        assert_eq!(qd, vec![0.0, 1.0]);
        assert_eq!(pd, vec![-1.0, 0.0]);

        // off the level set: ṗ = −∇g·(H + pᵗ) − g·q = −2·0.5 − 1
        let off = ExtendedState::new(vec![1.0], 0.0, vec![0.0], 0.0).unwrap();
        let (_, pd) = power.extended_vector_field(&off).unwrap();
        assert_eq!(pd, vec![-2.0, 0.0]);
    }

    #[test]
    fn degeneracy_examples() {
        let k = KeplerProblem::new(0.5).unwrap();
        let sys = PoincareSystem::new(k, PowerMonitor::new(1.0).unwrap());
        let x = ExtendedState::new(vec![0.6, 0.8], 0.0, vec![0.1, -0.3], 0.4).unwrap();
        let (block, det) = sys.degeneracy_block(&x).unwrap();
        // g = |q|² = 1, M⁻¹ = I
        assert!((block[(0, 0)] - 1.0).abs() < 1e-15 && block[(0, 1)].abs() < 1e-15);
        assert!((det - 1.0).abs() < 1e-14);

        let unit = PoincareSystem::new(oscillator(), UnitMonitor);
        let x = ExtendedState::new(vec![0.3], 0.0, vec![0.2], 0.0).unwrap();
        let (block, det) = unit.degeneracy_block(&x).unwrap();
        assert_eq!(block[(0, 0)], 1.0);
        assert_eq!(det, 1.0);

        let full = unit.momentum_hessian(&x).unwrap();
        assert_eq!(full[(1, 1)], 0.0);
        assert_eq!(full.determinant(), 0.0);
    }

    #[test]
    fn positivity_error_names_monitor() {
        let sys = PoincareSystem::new(oscillator(), PowerMonitor::new(1.0).unwrap());
        let x = ExtendedState::new(vec![0.0], 0.0, vec![1.0], -0.5).unwrap();
        match sys.extended_hamiltonian(&x) {
            Err(Error::Positivity { monitor, .. }) => assert_eq!(monitor, "power"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn kepler_power() -> PoincareSystem<KeplerProblem, AnyMonitor<KeplerProblem>> {
        let k = KeplerProblem::new(0.7).unwrap();
        let m = crate::monitors::energy_lagrangian_monitor(k.clone())
            .bounded(1e-3, 5.0)
            .unwrap();
        PoincareSystem::new(k, m)
    }

    proptest! {
        #[test]
        fn pt_rate_is_zero(q0 in 0.2f64..2.0, q1 in -1.0f64..1.0, p0 in -2.0f64..2.0, p1 in -2.0f64..2.0, pt in -1.0f64..1.0) {
            let sys = kepler_power();
            let x = ExtendedState::new(vec![q0, q1], 0.0, vec![p0, p1], pt).unwrap();
            let (_, pd) = sys.extended_vector_field(&x).unwrap();
            prop_assert_eq!(pd[2].to_bits(), 0.0f64.to_bits());
        }

        #[test]
        fn level_set_at_init(q0 in 0.2f64..2.0, q1 in -1.0f64..1.0, p0 in -2.0f64..2.0, p1 in -2.0f64..2.0) {
            let sys = PoincareSystem::new(KeplerProblem::new(0.7).unwrap(), PowerMonitor::new(1.0).unwrap());
            let x = init_extended(&sys.base, &[q0, q1], &[p0, p1], 0.0).unwrap();
            prop_assert!(sys.extended_hamiltonian(&x).unwrap().abs() <= 1e-14);
        }

        #[test]
        fn field_matches_jet_gradient(q0 in 0.2f64..2.0, q1 in -1.0f64..1.0, p0 in -2.0f64..2.0, p1 in -2.0f64..2.0, pt in -1.0f64..1.0) {
            let sys = kepler_power();
            let z = [q0, q1, 0.3, p0, p1, pt];
            let mut f = [0.0; 6];
            sys.vector_field_packed(&z, &mut f).unwrap();
            // ∂H̄/∂z_k via one first-order jet per coordinate; then f = Ω ∇H̄
            let mut grad = [0.0; 6];
            for (k, gk) in grad.iter_mut().enumerate() {
                let zj: Vec<Jet<f64>> = z.iter().enumerate()
                    .map(|(i, &v)| Jet::variable(v, if i == k { 1.0 } else { 0.0 }, 1))
                    .collect();
                let d = sys.partials(&zj[..2], &zj[3..5], zj[5]).unwrap();
                *gk = d.value.coeff(1);
            }
            let expected = [grad[3], grad[4], grad[5], -grad[0], -grad[1], -grad[2]];
            for k in 0..6 {
                prop_assert!((f[k] - expected[k]).abs() <= 1e-10 * (1.0 + expected[k].abs()));
            }
        }
    }
}
