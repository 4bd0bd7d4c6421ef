//! Test systems with analytic potential derivatives and exact reference
//! solutions.
//!
//! Kepler units are `μ = m = a = 1`, so every perihelion start has energy
//! `−½` and period `2π` regardless of eccentricity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::hamiltonian::{apply_inverse_mass, kinetic_energy};
use crate::numeric::{Matrix, Scalar};
use crate::{Error, HamiltonianSystem, PhaseState, SeparableHamiltonian};

/// Planar two-body problem `H = ½|p|² − 1/|q|`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeplerProblem {
    eccentricity: f64,
    minv: Matrix,
}

impl KeplerProblem {
    pub fn new(eccentricity: f64) -> Result<Self, Error> {
        check_eccentricity(eccentricity)?;
        Ok(Self {
            eccentricity,
            minv: Matrix::identity(2),
        })
    }

    pub fn eccentricity(&self) -> f64 {
        self.eccentricity
    }

    pub fn initial_state(&self) -> PhaseState {
        kepler_initial_conditions(self.eccentricity).expect("eccentricity validated")
    }

    pub fn reference_state(&self, t: f64) -> PhaseState {
        kepler_reference_state(t, self.eccentricity).expect("eccentricity validated")
    }

    /// Angular momentum `q₁p₂ − q₂p₁`.
    pub fn angular_momentum(q: &[f64], p: &[f64]) -> f64 {
        q[0] * p[1] - q[1] * p[0]
    }
}

fn check_eccentricity(e: f64) -> Result<(), Error> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::InvalidArgument(format!(
            "eccentricity must lie in [0, 1), got {e}"
        )));
    }
    Ok(())
}

/// `(r², 1/r)` with a collision check.
#[inline]
fn radius<S: Scalar>(q: &[S]) -> Result<(S, S), Error> {
    let r2 = q[0] * q[0] + q[1] * q[1];
    if !(r2.value() > 0.0) {
        return Err(Error::Singularity("kepler collision at q = 0"));
    }
    Ok((r2, r2.sqrt().recip()))
}

impl HamiltonianSystem for KeplerProblem {
    fn dim(&self) -> usize {
        2
    }

    fn energy<S: Scalar>(&self, q: &[S], p: &[S]) -> Result<S, Error> {
        let (_, inv_r) = radius(q)?;
        Ok((p[0] * p[0] + p[1] * p[1]) * 0.5 - inv_r)
    }

    fn gradient<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        dh_dq: &mut [S],
        dh_dp: &mut [S],
    ) -> Result<(), Error> {
        self.potential_gradient(q, dh_dq)?;
        dh_dp[0] = p[0];
        dh_dp[1] = p[1];
        Ok(())
    }

    fn inverse_mass(&self) -> Option<&Matrix> {
        Some(&self.minv)
    }
}

impl SeparableHamiltonian for KeplerProblem {
    fn inverse_mass_matrix(&self) -> &Matrix {
        &self.minv
    }

    fn potential<S: Scalar>(&self, q: &[S]) -> Result<S, Error> {
        let (_, inv_r) = radius(q)?;
        Ok(-inv_r)
    }

    fn potential_gradient<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error> {
        let (_, inv_r) = radius(q)?;
        let inv_r3 = inv_r * inv_r * inv_r;
        out[0] = q[0] * inv_r3;
        out[1] = q[1] * inv_r3;
        Ok(())
    }

    fn potential_hessian<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error> {
        // I/r³ − 3 q qᵀ/r⁵
        let (_, inv_r) = radius(q)?;
        let inv_r2 = inv_r * inv_r;
        let inv_r3 = inv_r2 * inv_r;
        let inv_r5 = inv_r3 * inv_r2;
        for i in 0..2 {
            for j in 0..2 {
                let mut v = q[i] * q[j] * inv_r5 * -3.0;
                if i == j {
                    v += inv_r3;
                }
                out[i * 2 + j] = v;
            }
        }
        Ok(())
    }

    fn potential_third<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error> {
        // −3(δᵢⱼq_k + δᵢ_k qⱼ + δⱼ_k qᵢ)/r⁵ + 15 qᵢqⱼq_k/r⁷
        let (_, inv_r) = radius(q)?;
        let inv_r2 = inv_r * inv_r;
        let inv_r5 = inv_r2 * inv_r2 * inv_r;
        let inv_r7 = inv_r5 * inv_r2;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut delta_terms = S::zero();
                    if i == j {
                        delta_terms += q[k];
                    }
                    if i == k {
                        delta_terms += q[j];
                    }
                    if j == k {
                        delta_terms += q[i];
                    }
                    out[(i * 2 + j) * 2 + k] =
                        q[i] * q[j] * q[k] * inv_r7 * 15.0 - delta_terms * inv_r5 * 3.0;
                }
            }
        }
        Ok(())
    }
}

/// Perihelion start `q₀ = (1 − e, 0)`, `p₀ = (0, √((1 + e)/(1 − e)))`.
pub fn kepler_initial_conditions(e: f64) -> Result<PhaseState, Error> {
    check_eccentricity(e)?;
    Ok(PhaseState {
        q: vec![1.0 - e, 0.0],
        p: vec![0.0, ((1.0 + e) / (1.0 - e)).sqrt()],
    })
}

/// Eccentric anomaly `E` with `E − e·sin E = M`, by Newton iteration
/// safeguarded with bisection on the bracket `[M − e, M + e]`.
///
/// The mean anomaly is reduced to `[−π, π]` first; the returned `E` carries
/// the same number of full revolutions as `M`.
pub fn kepler_equation_solve(mean_anomaly: f64, e: f64, tol: f64) -> Result<f64, Error> {
    check_eccentricity(e)?;
    if !mean_anomaly.is_finite() {
        return Err(Error::NonFinite("mean anomaly"));
    }
    let turns = libm::round(mean_anomaly / (2.0 * PI));
    let m = mean_anomaly - turns * 2.0 * PI;
    let residual = |x: f64| x - e * libm::sin(x) - m;

    let (mut lo, mut hi) = (m - e, m + e);
    let mut x = m + e * libm::sin(m);
    for _ in 0..200 {
        let f = residual(x);
        if f.abs() <= tol {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let fp = 1.0 - e * libm::cos(x);
        let mut next = x - f / fp;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x + turns * 2.0 * PI)
}

/// Exact state at time `t` of the orbit started at perihelion with
/// eccentricity `e`.
pub fn kepler_reference_state(t: f64, e: f64) -> Result<PhaseState, Error> {
    let ecc_anomaly = kepler_equation_solve(t, e, 1e-15)?;
    let (s, c) = (libm::sin(ecc_anomaly), libm::cos(ecc_anomaly));
    let b = (1.0 - e * e).sqrt();
    let rate = 1.0 / (1.0 - e * c);
    Ok(PhaseState {
        q: vec![c - e, b * s],
        p: vec![-s * rate, b * c * rate],
    })
}

/// `H = ½(pᵀp + qᵀq)` in `n` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicOscillator {
    n: usize,
    minv: Matrix,
}

impl HarmonicOscillator {
    pub fn new(n: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidArgument("oscillator dimension must be at least 1".into()));
        }
        Ok(Self {
            n,
            minv: Matrix::identity(n),
        })
    }

    /// `q = (1, 0, …)`, `p = 0`.
    pub fn initial_state(&self) -> PhaseState {
        let mut q = vec![0.0; self.n];
        q[0] = 1.0;
        PhaseState {
            q,
            p: vec![0.0; self.n],
        }
    }

    /// Exact flow: a rotation by angle `t` in every `(qᵢ, pᵢ)` plane.
    pub fn flow(start: &PhaseState, t: f64) -> PhaseState {
        let (s, c) = (libm::sin(t), libm::cos(t));
        let q = start.q.iter().zip(&start.p).map(|(&q, &p)| q * c + p * s).collect();
        let p = start.q.iter().zip(&start.p).map(|(&q, &p)| p * c - q * s).collect();
        PhaseState { q, p }
    }
}

impl HamiltonianSystem for HarmonicOscillator {
    fn dim(&self) -> usize {
        self.n
    }

    fn energy<S: Scalar>(&self, q: &[S], p: &[S]) -> Result<S, Error> {
        Ok(kinetic_energy(&self.minv, p) + self.potential(q)?)
    }

    fn gradient<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        dh_dq: &mut [S],
        dh_dp: &mut [S],
    ) -> Result<(), Error> {
        dh_dq.copy_from_slice(q);
        dh_dp.copy_from_slice(p);
        Ok(())
    }

    fn inverse_mass(&self) -> Option<&Matrix> {
        Some(&self.minv)
    }
}

impl SeparableHamiltonian for HarmonicOscillator {
    fn inverse_mass_matrix(&self) -> &Matrix {
        &self.minv
    }

    fn potential<S: Scalar>(&self, q: &[S]) -> Result<S, Error> {
        Ok(q.iter().fold(S::zero(), |acc, &x| acc + x * x) * 0.5)
    }

    fn potential_gradient<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error> {
        out.copy_from_slice(q);
        Ok(())
    }

    fn potential_hessian<S: Scalar>(&self, _q: &[S], out: &mut [S]) -> Result<(), Error> {
        for i in 0..self.n {
            for j in 0..self.n {
                out[i * self.n + j] = S::from_f64(if i == j { 1.0 } else { 0.0 });
            }
        }
        Ok(())
    }

    fn potential_third<S: Scalar>(&self, _q: &[S], out: &mut [S]) -> Result<(), Error> {
        out.iter_mut().for_each(|v| *v = S::zero());
        Ok(())
    }
}

/// `H = ½ pᵀM⁻¹p` with no potential.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeParticle {
    minv: Matrix,
}

impl FreeParticle {
    pub fn new(n: usize) -> Result<Self, Error> {
        Self::with_inverse_mass(Matrix::identity(n))
    }

    pub fn with_inverse_mass(minv: Matrix) -> Result<Self, Error> {
        if minv.rows() == 0 || !minv.is_symmetric(0.0) {
            return Err(Error::InvalidArgument(
                "inverse mass must be a non-empty symmetric matrix".into(),
            ));
        }
        Ok(Self { minv })
    }

    pub fn flow(&self, start: &PhaseState, t: f64) -> PhaseState {
        let v = self.minv.mul_vec(&start.p);
        PhaseState {
            q: start.q.iter().zip(&v).map(|(q, v)| q + t * v).collect(),
            p: start.p.clone(),
        }
    }
}

impl HamiltonianSystem for FreeParticle {
    fn dim(&self) -> usize {
        self.minv.rows()
    }

    fn energy<S: Scalar>(&self, _q: &[S], p: &[S]) -> Result<S, Error> {
        Ok(kinetic_energy(&self.minv, p))
    }

    fn gradient<S: Scalar>(
        &self,
        _q: &[S],
        p: &[S],
        dh_dq: &mut [S],
        dh_dp: &mut [S],
    ) -> Result<(), Error> {
        dh_dq.iter_mut().for_each(|v| *v = S::zero());
        apply_inverse_mass(&self.minv, p, dh_dp);
        Ok(())
    }

    fn inverse_mass(&self) -> Option<&Matrix> {
        Some(&self.minv)
    }
}

impl SeparableHamiltonian for FreeParticle {
    fn inverse_mass_matrix(&self) -> &Matrix {
        &self.minv
    }

    fn potential<S: Scalar>(&self, _q: &[S]) -> Result<S, Error> {
        Ok(S::zero())
    }

    fn potential_gradient<S: Scalar>(&self, _q: &[S], out: &mut [S]) -> Result<(), Error> {
        out.iter_mut().for_each(|v| *v = S::zero());
        Ok(())
    }

    fn potential_hessian<S: Scalar>(&self, _q: &[S], out: &mut [S]) -> Result<(), Error> {
        out.iter_mut().for_each(|v| *v = S::zero());
        Ok(())
    }

    fn potential_third<S: Scalar>(&self, _q: &[S], out: &mut [S]) -> Result<(), Error> {
        out.iter_mut().for_each(|v| *v = S::zero());
        Ok(())
    }
}

/// Runtime-selectable test problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Kepler(KeplerProblem),
    Harmonic(HarmonicOscillator),
    Free(FreeParticle),
}

impl Problem {
    pub fn kepler(e: f64) -> Result<Self, Error> {
        KeplerProblem::new(e).map(Problem::Kepler)
    }

    pub fn harmonic(n: usize) -> Result<Self, Error> {
        HarmonicOscillator::new(n).map(Problem::Harmonic)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Kepler(_) => "kepler",
            Problem::Harmonic(_) => "harmonic",
            Problem::Free(_) => "free",
        }
    }

    /// Canonical initial condition at `t = 0`.
    pub fn initial_state(&self) -> PhaseState {
        match self {
            Problem::Kepler(k) => k.initial_state(),
            Problem::Harmonic(h) => h.initial_state(),
            Problem::Free(f) => {
                let n = f.dim();
                PhaseState {
                    q: vec![0.0; n],
                    p: vec![1.0; n],
                }
            }
        }
    }

    /// Exact state at time `t` along the trajectory from [`initial_state`](Self::initial_state).
    pub fn reference_state(&self, t: f64) -> PhaseState {
        match self {
            Problem::Kepler(k) => k.reference_state(t),
            Problem::Harmonic(h) => HarmonicOscillator::flow(&h.initial_state(), t),
            Problem::Free(f) => f.flow(&self.initial_state(), t),
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $inner:ident => $body:expr) => {
        match $self {
            Problem::Kepler($inner) => $body,
            Problem::Harmonic($inner) => $body,
            Problem::Free($inner) => $body,
        }
    };
}

impl HamiltonianSystem for Problem {
    fn dim(&self) -> usize {
        dispatch!(self, s => s.dim())
    }

    fn energy<S: Scalar>(&self, q: &[S], p: &[S]) -> Result<S, Error> {
        dispatch!(self, s => s.energy(q, p))
    }

    fn gradient<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        dh_dq: &mut [S],
        dh_dp: &mut [S],
    ) -> Result<(), Error> {
        dispatch!(self, s => s.gradient(q, p, dh_dq, dh_dp))
    }

    fn inverse_mass(&self) -> Option<&Matrix> {
        dispatch!(self, s => s.inverse_mass())
    }
}

impl SeparableHamiltonian for Problem {
    fn inverse_mass_matrix(&self) -> &Matrix {
        dispatch!(self, s => s.inverse_mass_matrix())
    }

    fn potential<S: Scalar>(&self, q: &[S]) -> Result<S, Error> {
        dispatch!(self, s => s.potential(q))
    }

    fn potential_gradient<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error> {
        dispatch!(self, s => s.potential_gradient(q, out))
    }

    fn potential_hessian<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error> {
        dispatch!(self, s => s.potential_hessian(q, out))
    }

    fn potential_third<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error> {
        dispatch!(self, s => s.potential_third(q, out))
    }
}

/// Mean anomaly for a given eccentric anomaly.
pub fn mean_anomaly(ecc_anomaly: f64, e: f64) -> f64 {
    ecc_anomaly - e * libm::sin(ecc_anomaly)
}

/// `V`, `∇V`, `∇²V` and `∇³V` at `q` as flat row-major arrays.
#[allow(clippy::type_complexity)]
pub fn potential_derivatives<H: SeparableHamiltonian>(
    sys: &H,
    q: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>, Vec<f64>), Error> {
    let n = sys.dim();
    let v = sys.potential(q)?;
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n * n];
    let mut t = vec![0.0; n * n * n];
    sys.potential_gradient(q, &mut g)?;
    sys.potential_hessian(q, &mut h)?;
    sys.potential_third(q, &mut t)?;
    Ok((v, g, h, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn circular_start() {
        let s = kepler_initial_conditions(0.0).unwrap();
        assert_eq!(s.q, [1.0, 0.0]);
        assert_eq!(s.p, [0.0, 1.0]);
    }

    #[test]
    fn eccentric_starts_have_unit_semi_major_axis() {
        let k = KeplerProblem::new(0.9).unwrap();
        let s = k.initial_state();
        assert!(close(s.q[0], 0.1, 1e-15));
        assert!(close(s.p[1], 19f64.sqrt(), 1e-14));
        assert!(close(k.energy(&s.q, &s.p).unwrap(), -0.5, 1e-13));

        let s = kepler_initial_conditions(0.99).unwrap();
        assert!(close(s.q[0], 0.01, 1e-15));
        assert!(close(s.p[1], 199f64.sqrt(), 1e-12));
        let k = KeplerProblem::new(0.99).unwrap();
        assert!(close(k.energy(&s.q, &s.p).unwrap(), -0.5, 1e-12));
    }

    #[test]
    fn hyperbolic_eccentricity_rejected() {
        assert!(kepler_initial_conditions(1.0).is_err());
        assert!(kepler_initial_conditions(-0.1).is_err());
        assert!(KeplerProblem::new(1.5).is_err());
        assert!(kepler_equation_solve(1.0, 1.0, 1e-14).is_err());
    }

    #[test]
    fn kepler_equation_trivial_cases() {
        assert_eq!(kepler_equation_solve(0.0, 0.7, 1e-15).unwrap(), 0.0);
        for &m in &[0.3, 2.0, -1.1, 9.0] {
            assert!(close(kepler_equation_solve(m, 0.0, 1e-15).unwrap(), m, 1e-14));
        }
    }

    #[test]
    fn kepler_equation_against_plain_newton() {
        // independent oracle: unsafeguarded Newton from E = π
        let (m, e) = (core::f64::consts::FRAC_PI_2, 0.9);
        let mut oracle = PI;
        for _ in 0..60 {
            oracle -= (oracle - e * oracle.sin() - m) / (1.0 - e * oracle.cos());
        }
        assert!((oracle - e * oracle.sin() - m).abs() < 1e-14);
        let ours = kepler_equation_solve(m, e, 1e-15).unwrap();
        assert!(close(ours, oracle, 1e-14));
    }

    #[test]
    fn kepler_equation_many_revolutions() {
        let e = 0.95;
        for &m in &[100.0, 1000.0, -250.3] {
            let big_e = kepler_equation_solve(m, e, 1e-15).unwrap();
            let m_back = mean_anomaly(big_e, e);
            assert!(close(m_back, m, 1e-11), "{m} -> {m_back}");
        }
    }

    #[test]
    fn reference_state_endpoints() {
        for &e in &[0.0, 0.5, 0.9, 0.99] {
            let s0 = kepler_reference_state(0.0, e).unwrap();
            let init = kepler_initial_conditions(e).unwrap();
            assert!(s0.distance(&init) <= 1e-14 * init.p[1].max(1.0));
            let s1 = kepler_reference_state(2.0 * PI, e).unwrap();
            assert!(s1.distance(&init) <= 1e-12 * init.p[1].max(1.0), "e = {e}");
        }
    }

    #[test]
    fn apoapsis() {
        let s = kepler_reference_state(PI, 0.9).unwrap();
        assert!(close(s.q[0], -1.9, 1e-14));
        assert!(close(s.q[1], 0.0, 1e-14));
        assert!(close(s.p[0], 0.0, 1e-14));
        assert!(close(s.p[1], -(0.1f64 / 1.9).sqrt(), 1e-14));
    }

    #[test]
    fn kepler_potential_derivatives_at_points() {
        let k = KeplerProblem::new(0.5).unwrap();
        let (_, g, h, _) = potential_derivatives(&k, &[0.1, 0.0]).unwrap();
        assert!(close(g[0], 100.0, 1e-10) && g[1] == 0.0);
        let (_, _, h1, _) = potential_derivatives(&k, &[1.0, 0.0]).unwrap();
        assert_eq!(h1, [-2.0, 0.0, 0.0, 1.0]);
        assert!(h.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn kepler_collision_is_singular() {
        let k = KeplerProblem::new(0.5).unwrap();
        assert!(matches!(
            k.potential(&[0.0, 0.0]),
            Err(Error::Singularity(_))
        ));
        let mut out = [0.0; 2];
        assert!(k.potential_gradient(&[0.0, 0.0], &mut out).is_err());
    }

    #[test]
    fn harmonic_hessian_is_identity() {
        let h = HarmonicOscillator::new(3).unwrap();
        let (_, _, hess, third) = potential_derivatives(&h, &[0.3, -2.0, 5.0]).unwrap();
        assert_eq!(hess, Matrix::identity(3).as_slice());
        assert!(third.iter().all(|&v| v == 0.0));
    }
}
