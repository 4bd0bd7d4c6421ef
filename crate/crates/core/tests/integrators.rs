use poincare_vi::integrators::symplectic::{extended_defect, reduced_defect};
use poincare_vi::integrators::{
    euler_b_adaptive_step, htvi_step, integrate, integrate_collect, symplectic_euler_b_step, EulerB, ExplicitEuler,
    Htvi, HtviScheme, Stepper, DEFAULT_STEP_BUDGET,
};
use poincare_vi::monitors::{power_monitor, EnergyLagrangianMonitor, PowerMonitor, UnitMonitor};
use poincare_vi::poincare::init_extended;
use poincare_vi::problems::{kepler_reference_state, HarmonicOscillator, KeplerProblem};
use poincare_vi::{AnyMonitor, ExtendedState, HamiltonianSystem, Monitor, NewtonConfig, PhaseState, PoincareSystem};
use proptest::prelude::*;

fn start<H: HamiltonianSystem>(sys: &H, s: &PhaseState) -> ExtendedState {
    init_extended(sys, &s.q, &s.p, 0.0).unwrap()
}

fn final_error<H, M, St>(sys: &PoincareSystem<H, M>, stepper: &St, x0: &ExtendedState, h: f64, t_end: f64, exact: &PhaseState) -> f64
where
    H: HamiltonianSystem,
    M: Monitor,
    St: Stepper<H, M>,
{
    let s = integrate(sys, stepper, x0, h, t_end, DEFAULT_STEP_BUDGET, |_| Ok(())).unwrap();
    s.final_state
        .q
        .iter()
        .zip(&exact.q)
        .chain(s.final_state.p.iter().zip(&exact.p))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn oscillator_orders() {
    let osc = HarmonicOscillator::new(1).unwrap();
    let s0 = osc.initial_state();
    let x0 = start(&osc, &s0);
    let exact = HarmonicOscillator::flow(&s0, 1.0);
    let sys = PoincareSystem::new(osc, UnitMonitor);
    let hs = [0.2, 0.1, 0.05, 0.025];
    let eb: Vec<f64> = hs.iter().map(|&h| final_error(&sys, &EulerB::default(), &x0, h, 1.0, &exact)).collect();
    let ht: Vec<f64> = hs.iter().map(|&h| final_error(&sys, &Htvi::htvi4(), &x0, h, 1.0, &exact)).collect();
    let (a, b) = (slope(&hs, &eb), slope(&hs, &ht));
    assert!((0.9..=1.1).contains(&a), "Euler-B slope {a}");
    assert!((3.7..=4.3).contains(&b), "HTVI4 slope {b}");
}

#[test]
fn kepler_arclength_htvi4_order() {
    let k = KeplerProblem::new(0.5).unwrap();
    let s0 = k.initial_state();
    let x0 = start(&k, &s0);
    let h0 = k.energy(&s0.q, &s0.p).unwrap();
    let exact = kepler_reference_state(1.0, 0.5).unwrap();
    let monitor = poincare_vi::monitors::arclength_monitor(k.clone(), h0).unwrap();
    let sys = PoincareSystem::new(k, monitor);
    let hs = [0.2, 0.1, 0.05];
    let errs: Vec<f64> = hs.iter().map(|&h| final_error(&sys, &Htvi::htvi4(), &x0, h, 1.0, &exact)).collect();
    let p = slope(&hs, &errs);
    assert!((3.5..=4.5).contains(&p), "slope {p}, errors {errs:?}");
}

fn reduction_case<H: poincare_vi::SeparableHamiltonian + Clone>(base: H, s0: PhaseState) {
    let sys = PoincareSystem::new(base.clone(), UnitMonitor);
    let mut x = start(&base, &s0);
    let mut s = s0;
    let h = 0.01;
    let cfg = NewtonConfig::default();
    for _ in 0..1000 {
        x = euler_b_adaptive_step(&sys, &x, h, &cfg).unwrap().state;
        s = symplectic_euler_b_step(&base, &s, h).unwrap();
        for i in 0..s.dim() {
            assert!((x.q[i] - s.q[i]).abs() <= 1e-12);
            assert!((x.p[i] - s.p[i]).abs() <= 1e-12);
        }
    }
    assert!((x.qt - 10.0).abs() <= 1e-9);
}

#[test]
fn unit_monitor_reduces_to_classical_euler_b() {
    let osc = HarmonicOscillator::new(1).unwrap();
    reduction_case(osc.clone(), osc.initial_state());
    let k = KeplerProblem::new(0.5).unwrap();
    reduction_case(k.clone(), k.initial_state());
}

#[test]
fn lowest_order_htvi_is_euler_b() {
    let k = KeplerProblem::new(0.9).unwrap();
    let s0 = k.initial_state();
    let sys = PoincareSystem::new(k.clone(), PowerMonitor::new(1.0).unwrap());
    let cfg = NewtonConfig::default();
    let scheme = HtviScheme::rectangle();
    let mut a = start(&k, &s0);
    let mut b = a.clone();
    for _ in 0..100 {
        a = htvi_step(&sys, &scheme, &a, 0.05, &cfg).unwrap().state;
        b = euler_b_adaptive_step(&sys, &b, 0.05, &cfg).unwrap().state;
        for (u, v) in a.packed().iter().zip(b.packed()) {
            assert!((u - v).abs() <= 1e-12, "{u} vs {v}");
        }
    }
}

#[test]
fn finishing_step_lands_for_every_stepper() {
    let k = KeplerProblem::new(0.7).unwrap();
    let s0 = k.initial_state();
    let x0 = start(&k, &s0);
    let sys = PoincareSystem::new(k.clone(), EnergyLagrangianMonitor::new(k));
    for stepper in [&EulerB::default() as &dyn Stepper<_, _>, &Htvi::htvi4()] {
        let traj = integrate_collect(&sys, stepper, &x0, 0.07, 1.3, DEFAULT_STEP_BUDGET);
        let s = traj.result.unwrap();
        assert!((s.final_state.qt - 1.3).abs() <= 1e-10);
        assert_eq!(traj.records.len() as u64, s.steps + 1);
        assert!(traj.records.windows(2).all(|w| w[1].t > w[0].t));
    }
}

fn kepler_states() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..0.95, 0.0f64..std::f64::consts::TAU)
}

fn on_orbit(e: f64, t: f64) -> (KeplerProblem, ExtendedState) {
    let k = KeplerProblem::new(e).unwrap();
    let s = kepler_reference_state(t, e).unwrap();
    let x = ExtendedState::new(s.q.clone(), t, s.p.clone(), -k.energy(&s.q, &s.p).unwrap()).unwrap();
    (k, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn time_momentum_is_bitwise_invariant((e, t) in kepler_states(), h in 0.01f64..0.1) {
        let (k, x0) = on_orbit(e, t);
        let monitors: [AnyMonitor<KeplerProblem>; 3] = [
            power_monitor(1.0).unwrap().bounded(0.01, 8.0).unwrap(),
            AnyMonitor::Energy(EnergyLagrangianMonitor::new(k.clone())).bounded(1e-4, 2.0).unwrap(),
            AnyMonitor::Unit(UnitMonitor),
        ];
        for m in monitors {
            // g ≡ 1 needs a physically small step near perihelion
            let h = if matches!(m, AnyMonitor::Unit(_)) { 0.1 * h } else { h };
            let sys = PoincareSystem::new(k.clone(), m);
            for stepper in [&EulerB::default() as &dyn Stepper<_, _>, &Htvi::htvi4(), &ExplicitEuler] {
                let traj = integrate_collect(&sys, stepper, &x0, h, t + 1.0, DEFAULT_STEP_BUDGET);
                traj.result.unwrap();
                for r in &traj.records {
                    prop_assert_eq!(r.pt.to_bits(), x0.pt.to_bits());
                }
            }
        }
    }

    #[test]
    fn adaptive_steps_are_symplectic((e, t) in kepler_states()) {
        let (k, x) = on_orbit(e, t);
        let power = PoincareSystem::new(k.clone(), PowerMonitor::new(1.0).unwrap());
        let energy = PoincareSystem::new(k.clone(), EnergyLagrangianMonitor::new(k));
        for d in [
            extended_defect(&power, &EulerB::default(), &x, 0.01, 1e-6).unwrap(),
            reduced_defect(&power, &EulerB::default(), &x, 0.01, 1e-6).unwrap(),
            extended_defect(&energy, &EulerB::default(), &x, 0.01, 1e-6).unwrap(),
            extended_defect(&power, &Htvi::htvi4(), &x, 0.01, 1e-6).unwrap(),
            reduced_defect(&energy, &Htvi::htvi4(), &x, 0.01, 1e-6).unwrap(),
        ] {
            prop_assert!(d <= 1e-6, "defect {d}");
        }
    }

    #[test]
    fn euler_b_physical_step_is_h_times_g((e, t) in kepler_states(), h in 0.001f64..0.2) {
        let (k, x) = on_orbit(e, t);
        let sys = PoincareSystem::new(k, PowerMonitor::new(1.0).unwrap());
        let r = euler_b_adaptive_step(&sys, &x, h, &NewtonConfig::default()).unwrap();
        let g = sys.monitor_value(&x.q, &x.p, x.pt).unwrap();
        prop_assert!((r.h_physical - h * g).abs() <= 1e-14 * (1.0 + x.qt.abs()));
    }
}

#[test]
fn explicit_euler_control_is_not_symplectic() {
    let (k, x) = on_orbit(0.9, 0.0);
    let sys = PoincareSystem::new(k, UnitMonitor);
    assert!(reduced_defect(&sys, &ExplicitEuler, &x, 0.01, 1e-6).unwrap() > 1e-3);
    assert!(extended_defect(&sys, &ExplicitEuler, &x, 0.01, 1e-6).unwrap() > 1e-3);
}
