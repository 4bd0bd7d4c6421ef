//! Monitor functions `g(q, p, pᵗ) > 0` that set the ratio `dt/dτ` between
//! physical and fictive time, and the step-bounding transform.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;

use crate::hamiltonian::apply_inverse_mass;
use crate::numeric::{dot, Scalar};
use crate::{Error, MonitorError, SeparableHamiltonian};

/// Positive scalar field `g(q, p, pᵗ)` with analytic partials.
///
/// Every implementation is written over [`Scalar`] so the extended vector
/// field can be expanded in Taylor series through it.
pub trait Monitor {
    fn name(&self) -> &'static str;

    /// `∇_p g ≡ 0` and `∂g/∂pᵗ ≡ 0`.
    fn p_independent(&self) -> bool;

    /// `∂g/∂pᵗ` may be nonzero.
    fn pt_dependent(&self) -> bool;

    /// Returns `(g, ∂g/∂pᵗ)` and writes `∇_q g`, `∇_p g`.
    fn evaluate<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError>;

    /// `g` alone.
    fn value(&self, q: &[f64], p: &[f64], pt: f64) -> Result<f64, MonitorError> {
        let mut gq = vec![0.0; q.len()];
        let mut gp = vec![0.0; p.len()];
        self.evaluate(q, p, pt, &mut gq, &mut gp).map(|(g, _)| g)
    }
}

fn zero_fill<S: Scalar>(xs: &mut [S]) {
    xs.iter_mut().for_each(|v| *v = S::zero());
}

/// `g ≡ 1`: the untransformed system with `τ = t`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UnitMonitor;

impl Monitor for UnitMonitor {
    fn name(&self) -> &'static str {
        "none"
    }

    fn p_independent(&self) -> bool {
        true
    }

    fn pt_dependent(&self) -> bool {
        false
    }

    fn evaluate<S: Scalar>(
        &self,
        _q: &[S],
        _p: &[S],
        _pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError> {
        zero_fill(grad_q);
        zero_fill(grad_p);
        Ok((S::one(), S::zero()))
    }
}

/// Local truncation-error monitor of first-order Euler-B,
/// `g(q) = tol / ‖(h²/2) M⁻¹∇V(q)‖`.
///
/// With `fourth_root` set, `g = (tol / ‖(h²/2) M⁻¹∇V‖)^¼`, the fixed point
/// of the self-consistent form `g = tol / ‖(h²g³/2) M⁻¹∇V‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationErrorMonitor<H> {
    sys: H,
    tol: f64,
    h: f64,
    fourth_root: bool,
}

impl<H: SeparableHamiltonian> TruncationErrorMonitor<H> {
    pub fn new(tol: f64, h: f64, sys: H) -> Result<Self, Error> {
        if !(tol > 0.0) || !(h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation monitor needs tol > 0 and h > 0, got tol = {tol}, h = {h}"
            )));
        }
        Ok(Self {
            sys,
            tol,
            h,
            fourth_root: false,
        })
    }

    pub fn with_fourth_root(mut self, fourth_root: bool) -> Self {
        self.fourth_root = fourth_root;
        self
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

impl<H: SeparableHamiltonian> Monitor for TruncationErrorMonitor<H> {
    fn name(&self) -> &'static str {
        "trunc"
    }

    fn p_independent(&self) -> bool {
        true
    }

    fn pt_dependent(&self) -> bool {
        false
    }

    fn evaluate<S: Scalar>(
        &self,
        q: &[S],
        _p: &[S],
        _pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError> {
        let n = q.len();
        let minv = self.sys.inverse_mass_matrix();
        let mut dv = vec![S::zero(); n];
        let mut hess = vec![S::zero(); n * n];
        // the potential is only evaluated away from its singularities here
        self.sys
            .potential_gradient(q, &mut dv)
            .map_err(|_| MonitorError::Unbounded)?;
        self.sys
            .potential_hessian(q, &mut hess)
            .map_err(|_| MonitorError::Unbounded)?;
        let mut u = vec![S::zero(); n];
        apply_inverse_mass(minv, &dv, &mut u);
        let u2 = dot(&u, &u);
        if !(u2.value() > 0.0) {
            return Err(MonitorError::Unbounded);
        }
        let base = u2.sqrt().recip() * (2.0 * self.tol / (self.h * self.h));
        let (g, power) = if self.fourth_root {
            (base.powf(0.25), 0.25)
        } else {
            (base, 1.0)
        };
        // ∇‖u‖ = (M⁻¹∇²V)ᵀ u / ‖u‖, and g ∝ ‖u‖^(−power)
        let scale = -(g * power) / u2;
        for k in 0..n {
            let mut acc = S::zero();
            for i in 0..n {
                let mut du_ik = S::zero();
                for j in 0..n {
                    let m = minv[(i, j)];
                    if m != 0.0 {
                        du_ik += hess[j * n + k] * m;
                    }
                }
                acc += u[i] * du_ik;
            }
            grad_q[k] = acc * scale;
        }
        zero_fill(grad_p);
        Ok((g, S::zero()))
    }
}

/// Arclength parameterisation
/// `g(q) = (2(H₀ − V(q)) + ∇V(q)ᵀM⁻¹∇V(q))^(−½)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArclengthMonitor<H> {
    sys: H,
    h0: f64,
}

impl<H: SeparableHamiltonian> ArclengthMonitor<H> {
    pub fn new(sys: H, h0: f64) -> Result<Self, Error> {
        if !h0.is_finite() {
            return Err(Error::NonFinite("arclength reference energy"));
        }
        Ok(Self { sys, h0 })
    }
}

impl<H: SeparableHamiltonian> Monitor for ArclengthMonitor<H> {
    fn name(&self) -> &'static str {
        "arclength"
    }

    fn p_independent(&self) -> bool {
        true
    }

    fn pt_dependent(&self) -> bool {
        false
    }

    fn evaluate<S: Scalar>(
        &self,
        q: &[S],
        _p: &[S],
        _pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError> {
        let n = q.len();
        let minv = self.sys.inverse_mass_matrix();
        let v = self.sys.potential(q).map_err(|_| MonitorError::Vanishing)?;
        let mut dv = vec![S::zero(); n];
        let mut hess = vec![S::zero(); n * n];
        self.sys
            .potential_gradient(q, &mut dv)
            .map_err(|_| MonitorError::Vanishing)?;
        self.sys
            .potential_hessian(q, &mut hess)
            .map_err(|_| MonitorError::Vanishing)?;
        let mut mdv = vec![S::zero(); n];
        apply_inverse_mass(minv, &dv, &mut mdv);
        let w = (-v + self.h0) * 2.0 + dot(&dv, &mdv);
        if !(w.value() > 0.0) || !w.is_finite() {
            return Err(MonitorError::Unbounded);
        }
        let g = w.powf(-0.5);
        // ∇w = −2∇V + 2∇²V M⁻¹∇V,  ∇g = −½ w^(−3/2) ∇w = −g/w · (∇²V M⁻¹∇V − ∇V)
        let scale = -(g / w);
        for k in 0..n {
            let mut acc = -dv[k];
            for j in 0..n {
                acc += hess[k * n + j] * mdv[j];
            }
            grad_q[k] = acc * scale;
        }
        zero_fill(grad_p);
        Ok((g, S::zero()))
    }
}

/// `g(q) = (qᵀq)^γ`; `γ = 1` follows Kepler's second law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMonitor {
    gamma: f64,
}

impl PowerMonitor {
    pub fn new(gamma: f64) -> Result<Self, Error> {
        if !gamma.is_finite() {
            return Err(Error::NonFinite("power monitor exponent"));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Monitor for PowerMonitor {
    fn name(&self) -> &'static str {
        "power"
    }

    fn p_independent(&self) -> bool {
        true
    }

    fn pt_dependent(&self) -> bool {
        false
    }

    fn evaluate<S: Scalar>(
        &self,
        q: &[S],
        _p: &[S],
        _pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError> {
        let s = dot(q, q);
        if !(s.value() > 0.0) {
            return Err(if self.gamma > 0.0 {
                MonitorError::Vanishing
            } else {
                MonitorError::Unbounded
            });
        }
        let g = s.powf(self.gamma);
        // ∇g = 2γ (qᵀq)^(γ−1) q
        let factor = g / s * (2.0 * self.gamma);
        for (gq, &qi) in grad_q.iter_mut().zip(q) {
            *gq = factor * qi;
        }
        zero_fill(grad_p);
        Ok((g, S::zero()))
    }
}

/// Inverse shifted Lagrangian `g = 1 / |pᵗ − L(q, M⁻¹p)|` with
/// `L = ½ pᵀM⁻¹p − V(q)`.
///
/// On the level set `pᵗ = −H` this equals `1 / (2T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLagrangianMonitor<H> {
    sys: H,
}

impl<H: SeparableHamiltonian> EnergyLagrangianMonitor<H> {
    pub fn new(sys: H) -> Self {
        Self { sys }
    }
}

impl<H: SeparableHamiltonian> Monitor for EnergyLagrangianMonitor<H> {
    fn name(&self) -> &'static str {
        "energy"
    }

    fn p_independent(&self) -> bool {
        false
    }

    fn pt_dependent(&self) -> bool {
        true
    }

    fn evaluate<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError> {
        let n = q.len();
        let minv = self.sys.inverse_mass_matrix();
        let v = self.sys.potential(q).map_err(|_| MonitorError::Vanishing)?;
        let mut mp = vec![S::zero(); n];
        apply_inverse_mass(minv, p, &mut mp);
        let lagrangian = dot(p, &mp) * 0.5 - v;
        let d = pt - lagrangian;
        if !(d.value() != 0.0) || !d.is_finite() {
            return Err(MonitorError::Unbounded);
        }
        let g = d.abs().recip();
        // ∂g = −∂d / (d·|d|), with ∂d/∂q = ∇V, ∂d/∂p = −M⁻¹p, ∂d/∂pᵗ = 1
        let scale = -(g / d);
        self.sys
            .potential_gradient(q, grad_q)
            .map_err(|_| MonitorError::Vanishing)?;
        for gq in grad_q.iter_mut() {
            *gq = *gq * scale;
        }
        for (gp, &m) in grad_p.iter_mut().zip(&mp) {
            *gp = -(m * scale);
        }
        Ok((g, scale))
    }
}

/// Bounded monitor `ĝ = b (g + a) / (g + b)` with `a = Δt_min/Δτ`,
/// `b = Δt_max/Δτ`, so that `a ≤ ĝ ≤ b`.
///
/// Inner failures map to the limits: an unbounded inner monitor gives `b`,
/// a vanishing one gives `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedMonitor<M> {
    inner: M,
    a: f64,
    b: f64,
}

impl<M: Monitor> BoundedMonitor<M> {
    /// From physical step bounds and the fictive step.
    pub fn new(inner: M, dt_min: f64, dt_max: f64, dtau: f64) -> Result<Self, Error> {
        if !(dtau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "fictive step must be positive, got {dtau}"
            )));
        }
        Self::from_g_bounds(inner, dt_min / dtau, dt_max / dtau)
    }

    /// From the limits `a < b` of `ĝ` directly.
    pub fn from_g_bounds(inner: M, a: f64, b: f64) -> Result<Self, Error> {
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "monitor bounds need 0 < min < max < ∞, got [{a}, {b}]"
            )));
        }
        Ok(Self { inner, a, b })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// `ĝ` as a function of a raw `g ≥ 0`.
    pub fn transform(&self, g: f64) -> f64 {
        if g.is_infinite() {
            return self.b;
        }
        self.b * (g + self.a) / (g + self.b)
    }
}

impl<M: Monitor> Monitor for BoundedMonitor<M> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn p_independent(&self) -> bool {
        self.inner.p_independent()
    }

    fn pt_dependent(&self) -> bool {
        self.inner.pt_dependent()
    }

    fn evaluate<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError> {
        let (g, dg_dpt) = match self.inner.evaluate(q, p, pt, grad_q, grad_p) {
            Ok((g, d)) if g.is_finite() => (g, d),
            Ok(_) | Err(MonitorError::Unbounded) => {
                zero_fill(grad_q);
                zero_fill(grad_p);
                return Ok((S::from_f64(self.b), S::zero()));
            }
            Err(MonitorError::Vanishing) => {
                zero_fill(grad_q);
                zero_fill(grad_p);
                return Ok((S::from_f64(self.a), S::zero()));
            }
        };
        let denom = g + self.b;
        let bounded = (g + self.a) / denom * self.b;
        // dĝ/dg = b (b − a) / (g + b)²
        let slope = (denom * denom).recip() * (self.b * (self.b - self.a));
        for v in grad_q.iter_mut().chain(grad_p.iter_mut()) {
            *v = *v * slope;
        }
        Ok((bounded, dg_dpt * slope))
    }
}

/// Runtime-selectable monitor over a separable system `H`.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMonitor<H> {
    Unit(UnitMonitor),
    Trunc(TruncationErrorMonitor<H>),
    Arclength(ArclengthMonitor<H>),
    Power(PowerMonitor),
    Energy(EnergyLagrangianMonitor<H>),
    Bounded(Box<BoundedMonitor<AnyMonitor<H>>>),
}

impl<H: SeparableHamiltonian> AnyMonitor<H> {
    pub fn bounded(self, a: f64, b: f64) -> Result<Self, Error> {
        Ok(AnyMonitor::Bounded(Box::new(BoundedMonitor::from_g_bounds(
            self, a, b,
        )?)))
    }

    /// Bounds `(a, b)` when wrapped.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            AnyMonitor::Bounded(b) => Some(b.bounds()),
            _ => None,
        }
    }
}

macro_rules! dispatch_monitor {
    ($self:ident, $m:ident => $body:expr) => {
        match $self {
            AnyMonitor::Unit($m) => $body,
            AnyMonitor::Trunc($m) => $body,
            AnyMonitor::Arclength($m) => $body,
            AnyMonitor::Power($m) => $body,
            AnyMonitor::Energy($m) => $body,
            AnyMonitor::Bounded($m) => $body,
        }
    };
}

impl<H: SeparableHamiltonian> Monitor for AnyMonitor<H> {
    fn name(&self) -> &'static str {
        dispatch_monitor!(self, m => m.name())
    }

    fn p_independent(&self) -> bool {
        dispatch_monitor!(self, m => m.p_independent())
    }

    fn pt_dependent(&self) -> bool {
        dispatch_monitor!(self, m => m.pt_dependent())
    }

    fn evaluate<S: Scalar>(
        &self,
        q: &[S],
        p: &[S],
        pt: S,
        grad_q: &mut [S],
        grad_p: &mut [S],
    ) -> Result<(S, S), MonitorError> {
        dispatch_monitor!(self, m => m.evaluate(q, p, pt, grad_q, grad_p))
    }
}

/// Convenience constructors mirroring the monitor names used on the command line.
pub fn trunc_error_monitor<H: SeparableHamiltonian>(
    tol: f64,
    h: f64,
    sys: H,
) -> Result<AnyMonitor<H>, Error> {
    TruncationErrorMonitor::new(tol, h, sys).map(AnyMonitor::Trunc)
}

pub fn arclength_monitor<H: SeparableHamiltonian>(sys: H, h0: f64) -> Result<AnyMonitor<H>, Error> {
    ArclengthMonitor::new(sys, h0).map(AnyMonitor::Arclength)
}

pub fn power_monitor<H: SeparableHamiltonian>(gamma: f64) -> Result<AnyMonitor<H>, Error> {
    PowerMonitor::new(gamma).map(AnyMonitor::Power)
}

pub fn energy_lagrangian_monitor<H: SeparableHamiltonian>(sys: H) -> AnyMonitor<H> {
    AnyMonitor::Energy(EnergyLagrangianMonitor::new(sys))
}

pub fn bounded_monitor<H: SeparableHamiltonian>(
    inner: AnyMonitor<H>,
    dt_min: f64,
    dt_max: f64,
    dtau: f64,
) -> Result<AnyMonitor<H>, Error> {
    Ok(AnyMonitor::Bounded(Box::new(BoundedMonitor::new(
        inner, dt_min, dt_max, dtau,
    )?)))
}
