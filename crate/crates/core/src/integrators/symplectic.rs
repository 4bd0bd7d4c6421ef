//! Finite-difference checks of the symplectic condition `JᵀΩJ = Ω`.

use alloc::vec::Vec;

use super::Stepper;
use crate::numeric::Matrix;
use crate::{Error, ExtendedState, HamiltonianSystem, Monitor, PoincareSystem};

/// Central-difference Jacobian of `map` at `z` with absolute step `step`.
///
/// Each column is divided by the difference of the perturbed arguments as
/// actually represented, so linear maps are reproduced to roundoff.
pub fn fd_jacobian<F>(mut map: F, z: &[f64], step: f64) -> Result<Matrix, Error>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, Error>,
{
    let d = z.len();
    let mut zp = z.to_vec();
    let mut jac: Option<Matrix> = None;
    for j in 0..d {
        zp[j] = z[j] + step;
        let up = zp[j];
        let fp = map(&zp)?;
        zp[j] = z[j] - step;
        let down = zp[j];
        let fm = map(&zp)?;
        zp[j] = z[j];
        let jac = jac.get_or_insert_with(|| Matrix::zeros(fp.len(), d));
        for i in 0..fp.len() {
            jac[(i, j)] = (fp[i] - fm[i]) / (up - down);
        }
    }
    jac.ok_or_else(|| Error::InvalidArgument("empty argument".into()))
}

/// `Ω = [[0, I], [−I, 0]]` of size `2m`.
pub fn canonical_form(m: usize) -> Matrix {
    let mut omega = Matrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        omega[(i, m + i)] = 1.0;
        omega[(m + i, i)] = -1.0;
    }
    omega
}

/// `‖JᵀΩJ − Ω‖∞` (maximum row sum).
pub fn symplectic_defect(jac: &Matrix) -> f64 {
    let m = jac.rows() / 2;
    let omega = canonical_form(m);
    let mut d = jac.transpose().matmul(&omega).matmul(jac);
    for i in 0..2 * m {
        for j in 0..2 * m {
            d[(i, j)] -= omega[(i, j)];
        }
    }
    d.norm_inf()
}

/// Defect of the full map `(q̄, p̄) ↦ (q̄₁, p̄₁)` in dimension `2n + 2`.
pub fn extended_defect<H, M, St>(
    sys: &PoincareSystem<H, M>,
    stepper: &St,
    x: &ExtendedState,
    h: f64,
    fd_step: f64,
) -> Result<f64, Error>
where
    H: HamiltonianSystem,
    M: Monitor,
    St: Stepper<H, M> + ?Sized,
{
    let jac = fd_jacobian(
        |z| {
            let xs = ExtendedState::from_packed(z)?;
            Ok(stepper.step(sys, &xs, h)?.state.packed())
        },
        &x.packed(),
        fd_step,
    )?;
    Ok(symplectic_defect(&jac))
}

/// Defect of the reduced map `(q, p) ↦ (q₁, p₁)` at fixed `qᵗ`, `pᵗ`, in
/// dimension `2n`.
pub fn reduced_defect<H, M, St>(
    sys: &PoincareSystem<H, M>,
    stepper: &St,
    x: &ExtendedState,
    h: f64,
    fd_step: f64,
) -> Result<f64, Error>
where
    H: HamiltonianSystem,
    M: Monitor,
    St: Stepper<H, M> + ?Sized,
{
    let n = x.dim();
    let mut z = x.q.clone();
    z.extend_from_slice(&x.p);
    let jac = fd_jacobian(
        |z| {
            let xs = ExtendedState::new(z[..n].to_vec(), x.qt, z[n..].to_vec(), x.pt)?;
            let s = stepper.step(sys, &xs, h)?.state;
            let mut out = s.q;
            out.extend_from_slice(&s.p);
            Ok(out)
        },
        &z,
        fd_step,
    )?;
    Ok(symplectic_defect(&jac))
}
