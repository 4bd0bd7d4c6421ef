use alloc::format;
use alloc::vec::Vec;

use super::{explicit_euler_step, stormer_verlet_step, symplectic_euler_b_step, StepResult, Stepper};
use crate::{Error, ExtendedState, HamiltonianSystem, Monitor, PhaseState, PoincareSystem, SeparableHamiltonian};

/// Default cap on the number of steps of one run.
pub const DEFAULT_STEP_BUDGET: u64 = 100_000_000;

/// Distance to the target time at which a step counts as landing on it.
const LANDING_TOLERANCE: f64 = 1e-10;
/// Target accuracy of the numerical finishing-step search.
const FINISH_TOLERANCE: f64 = 1e-11;

/// One row of a trajectory. The initial state is step 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    /// Fictive time.
    pub tau: f64,
    /// Physical time `qᵗ`.
    pub t: f64,
    pub h_fictive: f64,
    pub h_physical: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub pt: f64,
    /// `H(q, p) − H₀`.
    pub energy_error: f64,
    /// Monitor value at the start of the step; NaN for the initial row.
    pub monitor_value: f64,
    pub newton_iterations: usize,
    /// The step was shortened to land exactly on the target time.
    pub finishing: bool,
}

/// End-of-run aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSummary {
    pub steps: u64,
    pub final_state: ExtendedState,
    pub tau: f64,
    pub max_energy_error: f64,
    /// Physical step range over regular steps; the finishing step is excluded.
    pub min_h_physical: f64,
    pub max_h_physical: f64,
    pub min_monitor: f64,
    pub max_monitor: f64,
    pub finishing_step: bool,
    pub newton_iterations: u64,
}

impl DriveSummary {
    fn new(x0: &ExtendedState) -> Self {
        Self {
            steps: 0,
            final_state: x0.clone(),
            tau: 0.0,
            max_energy_error: 0.0,
            min_h_physical: f64::INFINITY,
            max_h_physical: f64::NEG_INFINITY,
            min_monitor: f64::INFINITY,
            max_monitor: f64::NEG_INFINITY,
            finishing_step: false,
            newton_iterations: 0,
        }
    }

    fn absorb(&mut self, rec: &StepRecord) {
        self.steps = rec.step;
        self.tau = rec.tau;
        self.max_energy_error = self.max_energy_error.max(rec.energy_error.abs());
        self.newton_iterations += rec.newton_iterations as u64;
        if rec.step > 0 {
            self.min_monitor = self.min_monitor.min(rec.monitor_value);
            self.max_monitor = self.max_monitor.max(rec.monitor_value);
            if rec.finishing {
                self.finishing_step = true;
            } else {
                self.min_h_physical = self.min_h_physical.min(rec.h_physical);
                self.max_h_physical = self.max_h_physical.max(rec.h_physical);
            }
        }
    }
}

/// Records plus the outcome of a run; on failure the records hold every
/// step accepted before it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub result: Result<DriveSummary, Error>,
}

fn validate_span(h: f64, t0: f64, t_end: f64) -> Result<(), Error> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    if !t_end.is_finite() || !(t_end > t0) {
        return Err(Error::InvalidArgument(format!(
            "end time {t_end} must be finite and after the start time {t0}"
        )));
    }
    Ok(())
}

struct Recorder<'a, F> {
    sink: &'a mut F,
    h0: f64,
    summary: DriveSummary,
}

impl<F: FnMut(&StepRecord) -> Result<(), Error>> Recorder<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn emit<H: HamiltonianSystem>(
        &mut self,
        base: &H,
        step: u64,
        tau: f64,
        x: &ExtendedState,
        h_fictive: f64,
        h_physical: f64,
        monitor_value: f64,
        newton_iterations: usize,
        finishing: bool,
    ) -> Result<(), Error> {
        let energy = base.energy(&x.q, &x.p)?;
        let rec = StepRecord {
            step,
            tau,
            t: x.qt,
            h_fictive,
            h_physical,
            q: x.q.clone(),
            p: x.p.clone(),
            pt: x.pt,
            energy_error: energy - self.h0,
            monitor_value,
            newton_iterations,
            finishing,
        };
        self.summary.absorb(&rec);
        self.summary.final_state = x.clone();
        (self.sink)(&rec)
    }
}

/// Integrates with constant fictive step `h` until `qᵗ` reaches `t_end`,
/// handing every record (initial state included) to `sink`.
///
/// A step landing within `1e-10` of `t_end` ends the run. A step that would
/// overshoot is replaced by a finishing step whose fictive length puts
/// `qᵗ` on `t_end`: in closed form when the stepper provides one, otherwise
/// by regula falsi on the fictive step.
pub fn integrate<H, M, St, F>(
    sys: &PoincareSystem<H, M>,
    stepper: &St,
    x0: &ExtendedState,
    h: f64,
    t_end: f64,
    budget: u64,
    mut sink: F,
) -> Result<DriveSummary, Error>
where
    H: HamiltonianSystem,
    M: Monitor,
    St: Stepper<H, M> + ?Sized,
    F: FnMut(&StepRecord) -> Result<(), Error>,
{
    validate_span(h, x0.qt, t_end)?;
    let h0 = sys.base.energy(&x0.q, &x0.p)?;
    let mut rec = Recorder {
        sink: &mut sink,
        h0,
        summary: DriveSummary::new(x0),
    };
    rec.emit(&sys.base, 0, 0.0, x0, 0.0, 0.0, f64::NAN, 0, false)?;

    let mut x = x0.clone();
    let mut k: u64 = 0;
    let mut tau = 0.0;
    let wrap = |k: u64, t: f64, e: Error| Error::StepFailed {
        step: k + 1,
        time: t,
        source: alloc::boxed::Box::new(e),
    };
    loop {
        if k >= budget {
            return Err(Error::StepBudgetExceeded { budget, time: x.qt });
        }
        let res = stepper.step(sys, &x, h).map_err(|e| wrap(k, x.qt, e))?;
        if !(res.h_physical > 0.0) {
            return Err(wrap(k, x.qt, Error::TimeNotAdvancing { h_physical: res.h_physical }));
        }
        let t1 = res.state.qt;
        if (t1 - t_end).abs() <= LANDING_TOLERANCE {
            rec.emit(&sys.base, k + 1, tau + h, &res.state, h, res.h_physical, res.monitor_value, res.newton_iterations, false)?;
            break;
        }
        if t1 > t_end {
            let fin = finishing_step(sys, stepper, &x, h, &res, t_end).map_err(|e| wrap(k, x.qt, e))?;
            rec.emit(
                &sys.base,
                k + 1,
                tau + fin.h_fictive,
                &fin.state,
                fin.h_fictive,
                fin.h_physical,
                fin.monitor_value,
                fin.newton_iterations,
                true,
            )?;
            break;
        }
        k += 1;
        tau += h;
        rec.emit(&sys.base, k, tau, &res.state, h, res.h_physical, res.monitor_value, res.newton_iterations, false)?;
        x = res.state;
    }
    Ok(rec.summary)
}

fn finishing_step<H, M, St>(
    sys: &PoincareSystem<H, M>,
    stepper: &St,
    x: &ExtendedState,
    h: f64,
    overshoot: &StepResult,
    t_end: f64,
) -> Result<StepResult, Error>
where
    H: HamiltonianSystem,
    M: Monitor,
    St: Stepper<H, M> + ?Sized,
{
    let dt = t_end - x.qt;
    if let Some(hs) = stepper.fictive_step_for(sys, x, dt) {
        return stepper.step(sys, x, hs?);
    }
    // regula falsi (Illinois) on f(s) = qᵗ₁(s) − t_end over (0, h)
    let (mut a, mut fa) = (0.0, -dt);
    let (mut b, mut fb) = (h, overshoot.state.qt - t_end);
    let mut side = 0i8;
    let mut best: Option<StepResult> = None;
    for _ in 0..100 {
        let s = (a * fb - b * fa) / (fb - fa);
        let res = stepper.step(sys, x, s)?;
        let fs = res.state.qt - t_end;
        if fs.abs() <= FINISH_TOLERANCE {
            return Ok(res);
        }
        if fs < 0.0 {
            a = s;
            fa = fs;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = s;
            fb = fs;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        let closer = best.as_ref().is_none_or(|r| fs.abs() < (r.state.qt - t_end).abs());
        if closer {
            best = Some(res);
        }
        if b - a <= f64::EPSILON * h {
            break;
        }
    }
    match best {
        Some(res) if (res.state.qt - t_end).abs() <= LANDING_TOLERANCE => Ok(res),
        Some(res) => Err(Error::NotConverged {
            iterations: 100,
            residual_norm: (res.state.qt - t_end).abs(),
        }),
        None => Err(Error::NotConverged {
            iterations: 0,
            residual_norm: dt,
        }),
    }
}

/// [`integrate`] collecting every record.
pub fn integrate_collect<H, M, St>(
    sys: &PoincareSystem<H, M>,
    stepper: &St,
    x0: &ExtendedState,
    h: f64,
    t_end: f64,
    budget: u64,
) -> Trajectory
where
    H: HamiltonianSystem,
    M: Monitor,
    St: Stepper<H, M> + ?Sized,
{
    let mut records = Vec::new();
    let result = integrate(sys, stepper, x0, h, t_end, budget, |r| {
        records.push(r.clone());
        Ok(())
    });
    Trajectory { records, result }
}

/// Fixed-step methods on the base system `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedMethod {
    SymplecticEulerB,
    StormerVerlet,
    ExplicitEuler,
}

impl FixedMethod {
    pub fn step<H: SeparableHamiltonian>(&self, sys: &H, s: &PhaseState, h: f64) -> Result<PhaseState, Error> {
        match self {
            FixedMethod::SymplecticEulerB => symplectic_euler_b_step(sys, s, h),
            FixedMethod::StormerVerlet => stormer_verlet_step(sys, s, h),
            FixedMethod::ExplicitEuler => explicit_euler_step(sys, s, h),
        }
    }
}

/// Fixed-step integration of the base system from `t0` to `t_end`, with
/// times `t₀ + k·h`. When `t_end − t₀` is not a whole number of steps the
/// last step is shortened.
///
/// Records carry `pᵗ = −H₀` and monitor value 1 so they share the layout of
/// [`integrate`].
#[allow(clippy::too_many_arguments)]
pub fn integrate_fixed<H, F>(
    sys: &H,
    method: FixedMethod,
    start: &PhaseState,
    t0: f64,
    h: f64,
    t_end: f64,
    budget: u64,
    mut sink: F,
) -> Result<DriveSummary, Error>
where
    H: SeparableHamiltonian,
    F: FnMut(&StepRecord) -> Result<(), Error>,
{
    validate_span(h, t0, t_end)?;
    let h0 = sys.energy(&start.q, &start.p)?;
    let span = t_end - t0;
    let ratio = span / h;
    let nearest = libm::round(ratio);
    let (full, partial) = if (nearest * h - span).abs() <= LANDING_TOLERANCE {
        (nearest as u64, 0.0)
    } else {
        let f = libm::floor(ratio);
        (f as u64, span - f * h)
    };
    let total = full + u64::from(partial > 0.0);
    if total > budget {
        return Err(Error::StepBudgetExceeded { budget, time: t0 });
    }
    let x0 = ExtendedState::new(start.q.clone(), t0, start.p.clone(), -h0)?;
    let mut rec = Recorder {
        sink: &mut sink,
        h0,
        summary: DriveSummary::new(&x0),
    };
    rec.emit(sys, 0, 0.0, &x0, 0.0, 0.0, f64::NAN, 0, false)?;
    let mut s = start.clone();
    let mut x = x0;
    for k in 1..=total {
        let finishing = k > full;
        let hk = if finishing { partial } else { h };
        s = method.step(sys, &s, hk).map_err(|e| Error::StepFailed {
            step: k,
            time: x.qt,
            source: alloc::boxed::Box::new(e),
        })?;
        let t = if finishing { t_end } else { t0 + k as f64 * h };
        x.q.clone_from(&s.q);
        x.p.clone_from(&s.p);
        let h_physical = t - x.qt;
        x.qt = t;
        rec.emit(sys, k, t - t0, &x, hk, h_physical, 1.0, 0, finishing)?;
    }
    Ok(rec.summary)
}
