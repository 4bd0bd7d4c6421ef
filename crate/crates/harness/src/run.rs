//! Single experiment runs.

use std::time::Instant;

use poincare_vi::integrators::{
    integrate, integrate_fixed, DriveSummary, EulerB, FixedMethod, Htvi, StepRecord, Stepper, DEFAULT_STEP_BUDGET,
};
use poincare_vi::monitors::{ArclengthMonitor, EnergyLagrangianMonitor, PowerMonitor, TruncationErrorMonitor, UnitMonitor};
use poincare_vi::poincare::init_extended;
use poincare_vi::{AnyMonitor, Error, HamiltonianSystem, PhaseState, PoincareSystem, Problem};

use crate::config::{IntegratorKind, MonitorKind, ProblemKind, RunConfig};
use crate::csv::CsvFile;
use crate::error::{HarnessError, Result};

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    /// `max_k |H(q_k, p_k) − H₀|`.
    pub max_energy_error: f64,
    /// `‖(q, p) − reference‖` at the final physical time.
    pub global_error: f64,
    /// Physical step range, finishing step excluded.
    pub min_step: f64,
    pub max_step: f64,
    pub min_g: f64,
    pub max_g: f64,
    /// Least-squares slope of the signed energy error against `t`.
    pub energy_drift: f64,
    pub final_time: f64,
    pub final_state: PhaseState,
    pub newton_iterations: u64,
    /// Seconds; informational only.
    pub wall_time: f64,
}

impl RunSummary {
    pub fn header() -> &'static str {
        "steps,max_energy_error,global_error,min_step,max_step,min_g,max_g,energy_drift,final_time,wall_time"
    }

    pub fn row(&self) -> String {
        format!(
            "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.16e},{:.3}",
            self.steps,
            self.max_energy_error,
            self.global_error,
            self.min_step,
            self.max_step,
            self.min_g,
            self.max_g,
            self.energy_drift,
            self.final_time,
            self.wall_time
        )
    }
}

/// Online least-squares slope of `y` against `x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SlopeAccumulator {
    n: f64,
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    sxy: f64,
}

impl SlopeAccumulator {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mean_x;
        self.mean_x += dx / self.n;
        self.mean_y += (y - self.mean_y) / self.n;
        self.sxx += dx * (x - self.mean_x);
        self.sxy += dx * (y - self.mean_y);
    }

    /// `NaN` with fewer than two distinct abscissae.
    pub fn slope(&self) -> f64 {
        if self.sxx > 0.0 {
            self.sxy / self.sxx
        } else {
            f64::NAN
        }
    }
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem> {
    Ok(match cfg.problem {
        ProblemKind::Kepler => Problem::kepler(cfg.ecc)?,
        ProblemKind::Harmonic => Problem::harmonic(cfg.dim)?,
    })
}

pub fn build_monitor(cfg: &RunConfig, problem: &Problem) -> Result<AnyMonitor<Problem>> {
    let start = problem.initial_state();
    let monitor = match cfg.monitor_kind() {
        MonitorKind::None => AnyMonitor::Unit(UnitMonitor),
        MonitorKind::Trunc => {
            AnyMonitor::Trunc(TruncationErrorMonitor::new(cfg.tol, cfg.h, problem.clone())?.with_fourth_root(cfg.fourth_root))
        }
        MonitorKind::Arclength => {
            let h0 = problem.energy(&start.q, &start.p)?;
            AnyMonitor::Arclength(ArclengthMonitor::new(problem.clone(), h0)?)
        }
        MonitorKind::Power => AnyMonitor::Power(PowerMonitor::new(cfg.gamma)?),
        MonitorKind::Energy => AnyMonitor::Energy(EnergyLagrangianMonitor::new(problem.clone())),
    };
    match cfg.g_bounds() {
        Some((a, b)) => Ok(monitor.bounded(a, b)?),
        None => Ok(monitor),
    }
}

/// Runs `cfg`, passing every record to `observe`.
pub fn run_with<F>(cfg: &RunConfig, mut observe: F) -> Result<RunSummary>
where
    F: FnMut(&StepRecord) -> Result<()>,
{
    cfg.validate()?;
    let problem = build_problem(cfg)?;
    let start = problem.initial_state();
    let clock = Instant::now();
    let mut drift = SlopeAccumulator::default();
    let mut sink_error = None;
    let mut sink = |rec: &StepRecord| -> Result<(), Error> {
        drift.push(rec.t, rec.energy_error);
        observe(rec).map_err(|e| {
            sink_error = Some(e);
            Error::Interrupted
        })
    };
    let outcome = match cfg.integrator {
        IntegratorKind::EulerBFixed | IntegratorKind::StormerVerlet => {
            let method = if cfg.integrator == IntegratorKind::EulerBFixed {
                FixedMethod::SymplecticEulerB
            } else {
                FixedMethod::StormerVerlet
            };
            integrate_fixed(&problem, method, &start, 0.0, cfg.h, cfg.t_end, DEFAULT_STEP_BUDGET, &mut sink)
        }
        IntegratorKind::EulerB => drive(cfg, &problem, build_monitor(cfg, &problem)?, &EulerB::default(), &mut sink),
        IntegratorKind::Htvi4 => drive(cfg, &problem, build_monitor(cfg, &problem)?, &Htvi::htvi4(), &mut sink),
    };
    let summary = match outcome {
        Ok(s) => s,
        Err(e) => return Err(sink_error.take().unwrap_or(HarnessError::Solver(e))),
    };
    let wall_time = clock.elapsed().as_secs_f64();
    finish(&problem, summary, drift.slope(), wall_time)
}

fn drive<St, F>(
    cfg: &RunConfig,
    problem: &Problem,
    monitor: AnyMonitor<Problem>,
    stepper: &St,
    sink: &mut F,
) -> Result<DriveSummary, Error>
where
    St: Stepper<Problem, AnyMonitor<Problem>>,
    F: FnMut(&StepRecord) -> Result<(), Error>,
{
    let start = problem.initial_state();
    let x0 = init_extended(problem, &start.q, &start.p, 0.0)?;
    let sys = PoincareSystem::new(problem.clone(), monitor);
    if log::log_enabled!(log::Level::Warn) {
        if let Ok(hess) = sys.momentum_hessian(&x0) {
            let det = hess.determinant();
            if det.abs() < 1e-12 {
                log::warn!("momentum Hessian of the transformed Hamiltonian is singular at the start (det = {det:e})");
            }
        }
    }
    log::info!("{} with {}", stepper.name(), cfg.describe());
    integrate(&sys, stepper, &x0, cfg.h, cfg.t_end, DEFAULT_STEP_BUDGET, sink)
}

fn finish(problem: &Problem, s: DriveSummary, energy_drift: f64, wall_time: f64) -> Result<RunSummary> {
    let t = s.final_state.qt;
    let reference = problem.reference_state(t);
    let global_error = s
        .final_state
        .q
        .iter()
        .zip(&reference.q)
        .chain(s.final_state.p.iter().zip(&reference.p))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(RunSummary {
        steps: s.steps,
        max_energy_error: s.max_energy_error,
        global_error,
        min_step: s.min_h_physical,
        max_step: s.max_h_physical,
        min_g: s.min_monitor,
        max_g: s.max_monitor,
        energy_drift,
        final_time: t,
        final_state: s.final_state.base(),
        newton_iterations: s.newton_iterations,
        wall_time,
    })
}

/// Runs `cfg`, streaming the trajectory to `cfg.csv` when set. On failure
/// the partial CSV is flushed before the error is returned.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let Some(path) = &cfg.csv else {
        return run_with(cfg, |_| Ok(()));
    };
    cfg.validate()?;
    let n = build_problem(cfg)?.initial_state().dim();
    let mut file = CsvFile::create(path, n)?;
    let result = run_with(cfg, |rec| file.write(rec));
    let flushed = file.finish();
    let summary = result?;
    flushed?;
    Ok(summary)
}
