use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{solve_linear, Matrix};
use super::scalar::norm2;
use crate::Error;

/// Newton iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Absolute bound on the Euclidean residual norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative finite-difference step; the absolute step is
    /// `fd_step · max(1, ‖x‖)`.
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
            fd_step: 1e-6,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "newton tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidArgument(
                "newton max_iterations must be at least 1".into(),
            ));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "finite-difference step must be positive, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }
}

/// Square nonlinear system `F(x) = 0`.
///
/// Override [`jacobian`](NonlinearSystem::jacobian) when an analytic
/// Jacobian is available; the default uses central differences.
pub trait NonlinearSystem {
    fn dim(&self) -> usize;

    fn residual(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), Error>;

    fn jacobian(&mut self, x: &[f64], fd_step: f64, jac: &mut Matrix) -> Result<(), Error> {
        central_difference_jacobian(self, x, fd_step, jac)
    }
}

/// Central-difference Jacobian with absolute step `fd_step · max(1, ‖x‖)`,
/// rounded to a power of two.
pub fn central_difference_jacobian<F: NonlinearSystem + ?Sized>(
    system: &mut F,
    x: &[f64],
    fd_step: f64,
    jac: &mut Matrix,
) -> Result<(), Error> {
    let n = x.len();
    // a power of two keeps x ± step exact for most x
    let step = libm::exp2(libm::round(libm::log2(fd_step * norm2(x).max(1.0))));
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        xp[j] = x[j] + step;
        let up = xp[j];
        system.residual(&xp, &mut fp)?;
        xp[j] = x[j] - step;
        let down = xp[j];
        system.residual(&xp, &mut fm)?;
        xp[j] = x[j];
        let width = up - down;
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / width;
        }
    }
    Ok(())
}

/// Adapter turning a closure `F(x, out)` into a [`NonlinearSystem`] with
/// finite-difference Jacobian.
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), Error>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> NonlinearSystem for FnSystem<F>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), Error>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn residual(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
        (self.f)(x, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Stopping rule shared by the Newton loops: the residual is far below
/// `tol`, or below `tol` and no longer shrinking quickly.
pub(crate) fn converged(norm: f64, previous: f64, tol: f64) -> bool {
    norm <= 1e-3 * tol || (norm <= tol && norm > 0.25 * previous)
}

/// Newton's method from `x0`. Iterates past `‖F(x)‖₂ ≤ cfg.tolerance` while
/// the residual keeps contracting, so the result is accurate to roundoff.
pub fn newton_solve<F: NonlinearSystem + ?Sized>(
    system: &mut F,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonSolution, Error> {
    let n = system.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut jac = Matrix::zeros(n, n);
    system.residual(&x, &mut r)?;
    let mut norm = norm2(&r);
    let mut iterations = 0;
    let mut previous = f64::INFINITY;
    while !converged(norm, previous, cfg.tolerance) {
        if !norm.is_finite() || iterations == cfg.max_iterations {
            if norm <= cfg.tolerance {
                break;
            }
            return Err(Error::NotConverged {
                iterations,
                residual_norm: norm,
            });
        }
        system.jacobian(&x, cfg.fd_step, &mut jac)?;
        let dx = solve_linear(&jac, &r)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
        }
        system.residual(&x, &mut r)?;
        previous = norm;
        norm = norm2(&r);
        iterations += 1;
    }
    Ok(NewtonSolution {
        x,
        iterations,
        residual_norm: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_in_one_iteration() {
        let c = [3.0, -1.5];
        let mut sys = FnSystem::new(2, |x: &[f64], out: &mut [f64]| {
            out[0] = x[0] - c[0];
            out[1] = x[1] - c[1];
            Ok(())
        });
        let sol = newton_solve(&mut sys, &[10.0, 7.0], &NewtonConfig::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!((sol.x[0] - 3.0).abs() < 1e-12 && (sol.x[1] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn square_root_of_four() {
        // scalar Newton oracle: x ← x − (x² − 4)/(2x) from 3
        let mut oracle = 3.0_f64;
        for _ in 0..8 {
            oracle -= (oracle * oracle - 4.0) / (2.0 * oracle);
        }
        let mut sys = FnSystem::new(1, |x: &[f64], out: &mut [f64]| {
            out[0] = x[0] * x[0] - 4.0;
            Ok(())
        });
        let sol = newton_solve(&mut sys, &[3.0], &NewtonConfig::default()).unwrap();
        assert!((sol.x[0] - oracle).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
        assert!(sol.residual_norm <= 1e-12);
    }

    #[test]
    fn no_real_root_fails() {
        let mut sys = FnSystem::new(1, |x: &[f64], out: &mut [f64]| {
            out[0] = x[0] * x[0] + 1.0;
            Ok(())
        });
        let err = newton_solve(&mut sys, &[1.0], &NewtonConfig::default()).unwrap_err();
        // the first update lands on x = 0 where the derivative vanishes
        assert!(matches!(
            err,
            Error::NotConverged { .. } | Error::SingularMatrix
        ));
        let err = newton_solve(&mut sys, &[0.7], &NewtonConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::NotConverged { .. } | Error::SingularMatrix
        ));
    }

    #[test]
    fn analytic_jacobian_is_used() {
        struct Counting {
            fd_calls: usize,
        }
        impl NonlinearSystem for Counting {
            fn dim(&self) -> usize {
                1
            }
            fn residual(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
                self.fd_calls += 1;
                out[0] = x[0] * x[0] * x[0] - 8.0;
                Ok(())
            }
            fn jacobian(&mut self, x: &[f64], _: f64, jac: &mut Matrix) -> Result<(), Error> {
                jac[(0, 0)] = 3.0 * x[0] * x[0];
                Ok(())
            }
        }
        let mut sys = Counting { fd_calls: 0 };
        let sol = newton_solve(&mut sys, &[3.0], &NewtonConfig::default()).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-13);
        assert_eq!(sys.fd_calls, sol.iterations + 1);
    }

    #[test]
    fn deterministic_bitwise() {
        let run = || {
            let mut sys = FnSystem::new(2, |x: &[f64], out: &mut [f64]| {
                out[0] = x[0] * x[0] + x[1] - 3.0;
                out[1] = x[0] - x[1] * x[1] * x[1] + 0.5;
                Ok(())
            });
            newton_solve(&mut sys, &[1.3, 0.9], &NewtonConfig::default()).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.x[0].to_bits(), b.x[0].to_bits());
        assert_eq!(a.x[1].to_bits(), b.x[1].to_bits());
    }

    #[test]
    fn config_validation() {
        assert!(NewtonConfig::default().validate().is_ok());
        let bad = NewtonConfig {
            tolerance: 0.0,
            ..NewtonConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = NewtonConfig {
            max_iterations: 0,
            ..NewtonConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
