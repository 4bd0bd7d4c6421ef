use alloc::vec;
use alloc::vec::Vec;

use crate::numeric::{Jet, Scalar, MAX_ORDER};
use crate::{Error, ExtendedState, HamiltonianSystem, Monitor, PoincareSystem};

/// Taylor coefficients `Z[0..=count]` of the extended flow through the packed
/// state `z0`, so that `z(τ) ≈ Σ τᵏ Z[k]`.
///
/// `Z[k+1]` is the `k`-th coefficient of the vector field evaluated on the
/// series truncated at order `k`, divided by `k + 1`.
pub fn taylor_coefficients<S, H, M>(
    sys: &PoincareSystem<H, M>,
    z0: &[S],
    count: usize,
) -> Result<Vec<Vec<S>>, Error>
where
    S: Scalar,
    H: HamiltonianSystem,
    M: Monitor,
{
    if count > MAX_ORDER + 1 {
        return Err(Error::InvalidArgument(alloc::format!(
            "taylor expansion of order {count} exceeds {}",
            MAX_ORDER + 1
        )));
    }
    let d = z0.len();
    if d != 2 * sys.dim() + 2 {
        return Err(Error::DimensionMismatch {
            expected: 2 * sys.dim() + 2,
            found: d,
        });
    }
    let mut coeffs: Vec<Vec<S>> = Vec::with_capacity(count + 1);
    coeffs.push(z0.to_vec());
    let mut jets = vec![Jet::constant(S::zero()); d];
    let mut field = vec![Jet::constant(S::zero()); d];
    let mut buf = [S::zero(); MAX_ORDER + 1];
    for k in 0..count {
        for (i, jet) in jets.iter_mut().enumerate() {
            for (j, c) in coeffs.iter().enumerate() {
                buf[j] = c[i];
            }
            *jet = Jet::from_coefficients(&buf[..=k]);
        }
        sys.vector_field_packed(&jets, &mut field)?;
        let scale = 1.0 / (k as f64 + 1.0);
        let next: Vec<S> = field.iter().map(|f| f.coeff(k) * scale).collect();
        if !next.iter().all(Scalar::is_finite) {
            return Err(Error::NonFiniteDerivative);
        }
        coeffs.push(next);
    }
    Ok(coeffs)
}

/// `Σ_{k ≤ upto} sᵏ Z[k]` by Horner's rule, restricted to `range`.
pub(crate) fn sum_series<S: Scalar>(
    coeffs: &[Vec<S>],
    s: f64,
    upto: usize,
    range: core::ops::Range<usize>,
) -> Vec<S> {
    range
        .map(|i| {
            let mut acc = coeffs[upto][i];
            for k in (0..upto).rev() {
                acc = acc * s + coeffs[k][i];
            }
            acc
        })
        .collect()
}

/// Order-`r` Taylor approximation `x̄₀ + Σ_{k=1..r} hᵏ/k! x̄⁽ᵏ⁾` of the extended flow.
pub fn taylor_flow<H: HamiltonianSystem, M: Monitor>(
    sys: &PoincareSystem<H, M>,
    x0: &ExtendedState,
    h: f64,
    r: usize,
) -> Result<ExtendedState, Error> {
    let z0 = x0.packed();
    let coeffs = taylor_coefficients(sys, &z0, r)?;
    let z1 = sum_series(&coeffs, h, r, 0..z0.len());
    ExtendedState::from_packed(&z1)
}
