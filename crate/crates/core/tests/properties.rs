use poincare_vi::hamiltonian::{apply_inverse_mass, kinetic_energy};
use poincare_vi::numeric::{Jet, Matrix};
use poincare_vi::problems::{
    kepler_reference_state, potential_derivatives, FreeParticle, HarmonicOscillator, KeplerProblem,
};
use poincare_vi::{HamiltonianSystem, Problem, SeparableHamiltonian};
use proptest::prelude::*;

fn separable_energy<H: SeparableHamiltonian>(sys: &H, q: &[f64], p: &[f64]) -> f64 {
    kinetic_energy(sys.inverse_mass_matrix(), p) + sys.potential(q).unwrap()
}

fn check_separable<H: SeparableHamiltonian>(sys: &H, q: &[f64], p: &[f64]) -> Result<(), TestCaseError> {
    let generic = sys.energy(q, p).unwrap();
    let split = separable_energy(sys, q, p);
    prop_assert!((generic - split).abs() <= 1e-12 * generic.abs().max(1.0));
    let n = q.len();
    let (mut dq, mut dp) = (vec![0.0; n], vec![0.0; n]);
    sys.gradient(q, p, &mut dq, &mut dp).unwrap();
    let mut grad_v = vec![0.0; n];
    sys.potential_gradient(q, &mut grad_v).unwrap();
    let mut minv_p = vec![0.0; n];
    apply_inverse_mass(sys.inverse_mass_matrix(), p, &mut minv_p);
    for i in 0..n {
        prop_assert!((dq[i] - grad_v[i]).abs() <= 1e-12 * grad_v[i].abs().max(1.0));
        prop_assert!((dp[i] - minv_p[i]).abs() <= 1e-12 * minv_p[i].abs().max(1.0));
    }
    prop_assert!(sys.inverse_mass_matrix().is_symmetric(0.0));
    Ok(())
}

/// Directional derivatives of V along `d` from the analytic tensors.
fn tensor_directional(n: usize, g: &[f64], h: &[f64], t: &[f64], d: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..n {
        out[0] += g[i] * d[i];
        for j in 0..n {
            out[1] += h[i * n + j] * d[i] * d[j];
            for k in 0..n {
                out[2] += t[(i * n + j) * n + k] * d[i] * d[j] * d[k];
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn separable_forms_agree(
        q0 in -2.0f64..2.0, q1 in 0.2f64..2.0, p0 in -3.0f64..3.0, p1 in -3.0f64..3.0,
    ) {
        let q = [q0, q1];
        let p = [p0, p1];
        check_separable(&KeplerProblem::new(0.3).unwrap(), &q, &p)?;
        check_separable(&HarmonicOscillator::new(2).unwrap(), &q, &p)?;
        let minv = Matrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]);
        check_separable(&FreeParticle::with_inverse_mass(minv).unwrap(), &q, &p)?;
        check_separable(&Problem::kepler(0.9).unwrap(), &q, &p)?;
    }

    #[test]
    fn kepler_tensors_match_jets(
        r in 0.1f64..3.0, th in 0.0f64..std::f64::consts::TAU, d0 in -1.0f64..1.0, d1 in -1.0f64..1.0,
    ) {
        prop_assume!(d0.abs() + d1.abs() > 0.1);
        let k = KeplerProblem::new(0.5).unwrap();
        let q = [r * th.cos(), r * th.sin()];
        let d = [d0, d1];
        let (v, g, h, t) = potential_derivatives(&k, &q).unwrap();
        let lifted: Vec<Jet<f64>> = q.iter().zip(&d).map(|(&x, &s)| Jet::variable(x, s, 4)).collect();
        let jet = k.potential(&lifted).unwrap();
        prop_assert!((jet.value() - v).abs() <= 1e-14 * v.abs());
        let derivs = jet.derivatives();
        let analytic = tensor_directional(2, &g, &h, &t, &d);
        for o in 0..3 {
            let scale = analytic[o].abs().max(derivs[o].abs()).max(1e-300);
            prop_assert!((derivs[o] - analytic[o]).abs() <= 1e-6 * scale.max(1e-8 / r.powi(o as i32 + 2)),
                "order {}: jet {} vs analytic {}", o + 1, derivs[o], analytic[o]);
        }
    }

    #[test]
    fn kepler_gradient_matches_finite_differences(r in 0.1f64..3.0, th in 0.0f64..std::f64::consts::TAU) {
        let k = KeplerProblem::new(0.5).unwrap();
        let q = [r * th.cos(), r * th.sin()];
        let (_, g, h, _) = potential_derivatives(&k, &q).unwrap();
        let step = 1e-6 * r;
        for i in 0..2 {
            let (mut a, mut b) = (q, q);
            a[i] += step;
            b[i] -= step;
            let fd = (k.potential(&a).unwrap() - k.potential(&b).unwrap()) / (a[i] - b[i]);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * (g[0].abs() + g[1].abs()));
            let (ga, gb) = (potential_derivatives(&k, &a).unwrap().1, potential_derivatives(&k, &b).unwrap().1);
            for j in 0..2 {
                let fd = (ga[j] - gb[j]) / (a[i] - b[i]);
                let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                prop_assert!((fd - h[j * 2 + i]).abs() <= 1e-6 * scale);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reference_orbit_conserves_energy_and_momentum(t in -50.0f64..50.0, e in 0.0f64..0.99) {
        let k = KeplerProblem::new(e).unwrap();
        let s0 = k.initial_state();
        let s = kepler_reference_state(t, e).unwrap();
        let energy = k.energy(&s.q, &s.p).unwrap();
        prop_assert!((energy + 0.5).abs() <= 1e-12, "H = {energy}");
        let l0 = KeplerProblem::angular_momentum(&s0.q, &s0.p);
        let l = KeplerProblem::angular_momentum(&s.q, &s.p);
        prop_assert!((l - l0).abs() <= 1e-12, "L = {l} vs {l0}");
    }
}
