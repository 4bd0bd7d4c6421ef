//! Convergence studies: global error against step size and the fitted order.

use std::thread;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::run::{run_with, RunSummary};

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<(f64, RunSummary)>,
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub slope: f64,
}

impl ConvergenceReport {
    pub fn render(&self) -> String {
        let mut out = String::from("h,global_error,steps\n");
        for (h, s) in &self.rows {
            out.push_str(&format!("{h:e},{:.6e},{}\n", s.global_error, s.steps));
        }
        out.push_str(&format!("slope,{:.4}\n", self.slope));
        out
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Step sizes must number at least three, each half the previous.
pub fn check_step_sizes(hs: &[f64]) -> Result<()> {
    if hs.len() < 3 {
        return Err(HarnessError::config(format!("need at least 3 step sizes, got {}", hs.len())));
    }
    for w in hs.windows(2) {
        if !(w[0] > 0.0) || ((w[1] * 2.0 - w[0]) / w[0]).abs() > 1e-9 {
            return Err(HarnessError::config(format!(
                "each step size must halve the previous, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// Runs `base` once per step size, in parallel, and fits the order.
pub fn convergence(base: &RunConfig, hs: &[f64]) -> Result<ConvergenceReport> {
    check_step_sizes(hs)?;
    let configs: Vec<RunConfig> = hs
        .iter()
        .map(|&h| RunConfig {
            h,
            csv: None,
            ..base.clone()
        })
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    let results: Vec<Result<RunSummary>> = thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || run_with(cfg, |_| Ok(()))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("convergence run panicked")).collect()
    });
    let mut rows = Vec::with_capacity(hs.len());
    for (&h, r) in hs.iter().zip(results) {
        rows.push((h, r?));
    }
    let lx: Vec<f64> = rows.iter().map(|(h, _)| h.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|(_, s)| s.global_error.ln()).collect();
    Ok(ConvergenceReport {
        slope: fit_slope(&lx, &ly),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = [0.1f64, 0.05, 0.025].iter().map(|h| h.ln()).collect();
        let y: Vec<f64> = [0.1f64, 0.05, 0.025].iter().map(|h| (7.0 * h.powi(3)).ln()).collect();
        assert!((fit_slope(&x, &y) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn step_sizes_must_halve() {
        assert!(check_step_sizes(&[0.2, 0.1, 0.05]).is_ok());
        assert!(check_step_sizes(&[0.2, 0.1]).is_err());
        assert!(check_step_sizes(&[0.2, 0.1, 0.04]).is_err());
        assert_eq!(check_step_sizes(&[0.1, 0.2, 0.4]).unwrap_err().exit_code(), 2);
    }
}
