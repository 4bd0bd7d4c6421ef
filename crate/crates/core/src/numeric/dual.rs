use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use super::Scalar;

/// First-order forward-mode dual number `re + ε·du` with `ε² = 0`.
///
/// Generic over its component type so it can be nested inside or around
/// [`Jet`](super::Jet).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub du: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, du: S) -> Self {
        Self { re, du }
    }

    /// Independent variable seeded with unit derivative.
    pub fn variable(re: S) -> Self {
        Self { re, du: S::one() }
    }

    pub fn constant(re: S) -> Self {
        Self { re, du: S::zero() }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.du + rhs.du)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.du - rhs.du)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.du + self.du * rhs.re)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let re = self.re / rhs.re;
        Self::new(re, (self.du - re * rhs.du) / rhs.re)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<S: Scalar> Add<f64> for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        Self::new(self.re + rhs, self.du)
    }
}

impl<S: Scalar> Sub<f64> for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        Self::new(self.re - rhs, self.du)
    }
}

impl<S: Scalar> Mul<f64> for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.re * rhs, self.du * rhs)
    }
}

impl<S: Scalar> Div<f64> for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        Self::new(self.re / rhs, self.du / rhs)
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<S: Scalar> SubAssign for Dual<S> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<S: Scalar> MulAssign for Dual<S> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Self::constant(S::from_f64(x))
    }

    #[inline]
    fn value(&self) -> f64 {
        self.re.value()
    }

    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.du / (s * 2.0))
    }

    #[inline]
    fn powf(self, exponent: f64) -> Self {
        let p = self.re.powf(exponent);
        Self::new(p, self.du * (p / self.re) * exponent)
    }

    #[inline]
    fn abs(self) -> Self {
        if self.re.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.du.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        // d/dx (x² · 3x) at x = 2 is 9x² = 36
        let x = Dual::variable(2.0);
        let y = x * x * (x * 3.0);
        assert_eq!(y.re, 24.0);
        assert_eq!(y.du, 36.0);
    }

    #[test]
    fn quotient_sqrt_pow() {
        let x = Dual::variable(4.0_f64);
        let r = x.recip();
        assert!((r.du + 1.0 / 16.0).abs() < 1e-15);
        let s = x.sqrt();
        assert!((s.du - 0.25).abs() < 1e-15);
        let p = x.powf(1.5);
        assert!((p.re - 8.0).abs() < 1e-14);
        assert!((p.du - 3.0).abs() < 1e-14);
    }

    #[test]
    fn nested_gives_second_derivative() {
        // f(x) = x³, f''(x) = 6x
        let x = Dual::new(Dual::variable(1.5_f64), Dual::constant(1.0));
        let y = x * x * x;
        assert!((y.du.du - 9.0).abs() < 1e-14);
    }
}
