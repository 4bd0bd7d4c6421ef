use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use alloc::vec::Vec;

use super::Scalar;
use crate::Error;

/// Highest Taylor order a [`Jet`] can carry.
pub const MAX_ORDER: usize = 4;

/// Truncated Taylor series `c₀ + c₁s + … + c_k s^k` with `k ≤ MAX_ORDER`.
///
/// Binary operations truncate at the smaller order of the two operands.
/// Constants carry `MAX_ORDER` so they never lower the order of a product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<S> {
    coeffs: [S; MAX_ORDER + 1],
    order: usize,
}

impl<S: Scalar> Jet<S> {
    pub fn constant(value: S) -> Self {
        let mut coeffs = [S::zero(); MAX_ORDER + 1];
        coeffs[0] = value;
        Self {
            coeffs,
            order: MAX_ORDER,
        }
    }

    /// `value + slope·s` truncated at `order`.
    pub fn variable(value: S, slope: S, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coeffs = [S::zero(); MAX_ORDER + 1];
        coeffs[0] = value;
        if order >= 1 {
            coeffs[1] = slope;
        }
        Self { coeffs, order }
    }

    /// Series with the given Taylor coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coefficients(coeffs: &[S]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= MAX_ORDER + 1);
        let mut c = [S::zero(); MAX_ORDER + 1];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Self {
            coeffs: c,
            order: coeffs.len() - 1,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> S {
        self.coeffs[0]
    }

    /// Taylor coefficient `c_k`; zero above the order.
    pub fn coeff(&self, k: usize) -> S {
        if k <= self.order {
            self.coeffs[k]
        } else {
            S::zero()
        }
    }

    /// Taylor coefficients `c₀..=c_order`.
    pub fn coefficients(&self) -> &[S] {
        &self.coeffs[..=self.order]
    }

    /// Derivatives `dᵏ/dsᵏ` at `s = 0` for `k = 1..=order`.
    pub fn derivatives(&self) -> Vec<S> {
        let mut factorial = 1.0;
        (1..=self.order)
            .map(|k| {
                factorial *= k as f64;
                self.coeffs[k] * factorial
            })
            .collect()
    }

    fn zeros(order: usize) -> Self {
        Self {
            coeffs: [S::zero(); MAX_ORDER + 1],
            order,
        }
    }
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut out = Self::zeros(self.order.min(rhs.order));
        for k in 0..=out.order {
            out.coeffs[k] = self.coeffs[k] + rhs.coeffs[k];
        }
        out
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut out = Self::zeros(self.order.min(rhs.order));
        for k in 0..=out.order {
            out.coeffs[k] = self.coeffs[k] - rhs.coeffs[k];
        }
        out
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros(self.order.min(rhs.order));
        for k in 0..=out.order {
            let mut acc = S::zero();
            for j in 0..=k {
                acc += self.coeffs[j] * rhs.coeffs[k - j];
            }
            out.coeffs[k] = acc;
        }
        out
    }
}

impl<S: Scalar> Div for Jet<S> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let mut out = Self::zeros(self.order.min(rhs.order));
        let b0 = rhs.coeffs[0];
        for k in 0..=out.order {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * out.coeffs[k - j];
            }
            out.coeffs[k] = acc / b0;
        }
        out
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut out = self;
        for c in out.coeffs[..=out.order].iter_mut() {
            *c = -*c;
        }
        out
    }
}

impl<S: Scalar> Add<f64> for Jet<S> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.coeffs[0] = self.coeffs[0] + rhs;
        self
    }
}

impl<S: Scalar> Sub<f64> for Jet<S> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.coeffs[0] = self.coeffs[0] - rhs;
        self
    }
}

impl<S: Scalar> Mul<f64> for Jet<S> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        for c in self.coeffs[..=self.order].iter_mut() {
            *c = *c * rhs;
        }
        self
    }
}

impl<S: Scalar> Div<f64> for Jet<S> {
    type Output = Self;
    #[inline]
    fn div(mut self, rhs: f64) -> Self {
        for c in self.coeffs[..=self.order].iter_mut() {
            *c = *c / rhs;
        }
        self
    }
}

impl<S: Scalar> AddAssign for Jet<S> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<S: Scalar> SubAssign for Jet<S> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<S: Scalar> MulAssign for Jet<S> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Self::constant(S::from_f64(x))
    }

    #[inline]
    fn value(&self) -> f64 {
        self.coeffs[0].value()
    }

    fn sqrt(self) -> Self {
        let mut out = Self::zeros(self.order);
        let s0 = self.coeffs[0].sqrt();
        out.coeffs[0] = s0;
        for k in 1..=self.order {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= out.coeffs[j] * out.coeffs[k - j];
            }
            out.coeffs[k] = acc / (s0 * 2.0);
        }
        out
    }

    fn powf(self, exponent: f64) -> Self {
        // k·a₀·y_k = Σ_{j=1..k} (e·j − (k − j)) a_j y_{k−j}
        let mut out = Self::zeros(self.order);
        let a0 = self.coeffs[0];
        out.coeffs[0] = a0.powf(exponent);
        for k in 1..=self.order {
            let mut acc = S::zero();
            for j in 1..=k {
                let w = exponent * j as f64 - (k - j) as f64;
                acc += self.coeffs[j] * out.coeffs[k - j] * w;
            }
            out.coeffs[k] = acc / (a0 * k as f64);
        }
        out
    }

    #[inline]
    fn abs(self) -> Self {
        if self.coeffs[0].value() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn is_finite(&self) -> bool {
        self.coeffs[..=self.order].iter().all(Scalar::is_finite)
    }
}

/// Scalar field `f: ℝⁿ → ℝ` that can be evaluated over any [`Scalar`].
pub trait ScalarField {
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

/// Value and directional derivatives `dᵏ/dsᵏ f(x + s·direction)` at `s = 0`
/// for `k ≤ order`, obtained by one jet evaluation.
///
/// Read the derivatives with [`Jet::derivatives`].
pub fn jet_lift<F: ScalarField>(
    f: &F,
    x: &[f64],
    direction: &[f64],
    order: usize,
) -> Result<Jet<f64>, Error> {
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(alloc::format!(
            "jet order {order} exceeds {MAX_ORDER}"
        )));
    }
    if x.len() != direction.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: direction.len(),
        });
    }
    let seeded: Vec<Jet<f64>> = x
        .iter()
        .zip(direction)
        .map(|(&xi, &di)| Jet::variable(xi, di, order))
        .collect();
    let out = f.eval(&seeded);
    if !out.is_finite() {
        return Err(Error::NonFiniteDerivative);
    }
    Ok(out)
}
