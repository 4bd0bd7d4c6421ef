//! Hamiltonian system contract and base phase-space states.

use alloc::vec;
use alloc::vec::Vec;

use crate::numeric::{Dual, Jet, Matrix, Scalar, MAX_ORDER};
use crate::Error;

/// Base phase-space point `(q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self, Error> {
        if q.is_empty() {
            return Err(Error::InvalidArgument("phase state dimension must be at least 1".into()));
        }
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        if !q.iter().chain(&p).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("phase state"));
        }
        Ok(Self { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Euclidean distance in `(q, p)`.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.p.iter().zip(&other.p))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Autonomous Hamiltonian `H(q, p)` evaluable over any [`Scalar`].
///
/// Evaluating over [`Jet`] yields directional derivatives up to order
/// [`MAX_ORDER`]; evaluating over [`Dual`] yields exact first derivatives.
/// Implementations must therefore be written with `Scalar` arithmetic only.
pub trait HamiltonianSystem {
    fn dim(&self) -> usize;

    fn energy<S: Scalar>(&self, q: &[S], p: &[S]) -> Result<S, Error>;

    /// Writes `∂H/∂q` and `∂H/∂p`.
    fn gradient<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        dh_dq: &mut [S],
        dh_dp: &mut [S],
    ) -> Result<(), Error>;

    /// `M⁻¹` when `H = ½ pᵀM⁻¹p + V(q)`.
    fn inverse_mass(&self) -> Option<&Matrix> {
        None
    }
}

/// Separable Hamiltonian `H(q, p) = ½ pᵀM⁻¹p + V(q)` with analytic
/// potential derivatives up to third order.
pub trait SeparableHamiltonian: HamiltonianSystem {
    /// Symmetric positive-definite `M⁻¹`.
    fn inverse_mass_matrix(&self) -> &Matrix;

    fn potential<S: Scalar>(&self, q: &[S]) -> Result<S, Error>;

    fn potential_gradient<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error>;

    /// Row-major `n × n` Hessian.
    fn potential_hessian<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error>;

    /// Third derivative tensor, `out[(i·n + j)·n + k] = ∂³V/∂qᵢ∂qⱼ∂q_k`.
    fn potential_third<S: Scalar>(&self, q: &[S], out: &mut [S]) -> Result<(), Error>;
}

/// `M⁻¹ p` over generic scalars.
pub fn apply_inverse_mass<S: Scalar>(minv: &Matrix, p: &[S], out: &mut [S]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = S::zero();
        for (j, &pj) in p.iter().enumerate() {
            let m = minv[(i, j)];
            if m != 0.0 {
                acc += pj * m;
            }
        }
        *o = acc;
    }
}

/// `½ pᵀM⁻¹p`.
pub fn kinetic_energy<S: Scalar>(minv: &Matrix, p: &[S]) -> S {
    let mut acc = S::zero();
    for i in 0..p.len() {
        for j in 0..p.len() {
            let m = minv[(i, j)];
            if m != 0.0 {
                acc += p[i] * p[j] * m;
            }
        }
    }
    acc * 0.5
}

/// `H(q + s·dq, p + s·dp)` as a jet of the given order.
pub fn energy_jet<H: HamiltonianSystem>(
    sys: &H,
    q: &[f64],
    p: &[f64],
    dq: &[f64],
    dp: &[f64],
    order: usize,
) -> Result<Jet<f64>, Error> {
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(alloc::format!("jet order {order} exceeds {MAX_ORDER}")));
    }
    let lift = |x: &[f64], d: &[f64]| -> Vec<Jet<f64>> {
        x.iter().zip(d).map(|(&a, &b)| Jet::variable(a, b, order)).collect()
    };
    let e = sys.energy(&lift(q, dq), &lift(p, dp))?;
    if !e.is_finite() {
        return Err(Error::NonFiniteDerivative);
    }
    Ok(e)
}

/// `∂²H/∂p²` by forward differentiation of `∂H/∂p`.
pub fn momentum_hessian<H: HamiltonianSystem>(
    sys: &H,
    q: &[f64],
    p: &[f64],
) -> Result<Matrix, Error> {
    let n = sys.dim();
    let qd: Vec<Dual<f64>> = q.iter().map(|&v| Dual::constant(v)).collect();
    let mut pd: Vec<Dual<f64>> = p.iter().map(|&v| Dual::constant(v)).collect();
    let mut gq = vec![Dual::constant(0.0); n];
    let mut gp = vec![Dual::constant(0.0); n];
    let mut hess = Matrix::zeros(n, n);
    for j in 0..n {
        pd[j].du = 1.0;
        sys.gradient(&qd, &pd, &mut gq, &mut gp)?;
        pd[j].du = 0.0;
        for i in 0..n {
            hess[(i, j)] = gp[i].du;
        }
    }
    Ok(hess)
}
