//! Kepler table presets at eccentricities 0.9 and 0.99.

use std::fmt::Write as _;
use std::str::FromStr;
use std::thread;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::run::{run_with, RunSummary};

/// Published figures for a row, for side-by-side display.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    pub steps: u64,
    pub energy_error: f64,
    pub global_error: f64,
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub method: &'static str,
    pub monitor: &'static str,
    pub config: RunConfig,
    pub published: PublishedRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    E09,
    E099,
}

impl FromStr for Preset {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e09" => Ok(Preset::E09),
            "e099" => Ok(Preset::E099),
            other => Err(HarnessError::config(format!("unknown table preset {other:?}, expected e09 or e099"))),
        }
    }
}

fn row(method: &'static str, monitor: &'static str, text: &str, steps: u64, energy: f64, global: f64) -> TableRow {
    TableRow {
        method,
        monitor,
        config: RunConfig::from_text(text).expect("bundled preset parses"),
        published: PublishedRow {
            steps,
            energy_error: energy,
            global_error: global,
        },
    }
}

impl Preset {
    pub fn title(self) -> &'static str {
        match self {
            Preset::E09 => "Kepler planar two-body problem, eccentricity 0.9",
            Preset::E099 => "Kepler planar two-body problem, eccentricity 0.99",
        }
    }

    pub fn rows(self) -> Vec<TableRow> {
        match self {
            Preset::E09 => vec![
                row("HTVI4", "Gamma", include_str!("../configs/e09-gamma.conf"), 181, 1.43e-5, 7.09e-6),
                row("HTVI4", "Energy", include_str!("../configs/e09-energy.conf"), 146, 1.93e-6, 4.76e-6),
                row("HTVI4", "Arclength", include_str!("../configs/e09-arclength.conf"), 185, 1.10e-4, 3.69e-5),
                row("HTVI4", "-", include_str!("../configs/e09-fixed.conf"), 4000, 2.50e-6, 2.89e-5),
            ],
            Preset::E099 => vec![
                row("HTVI4", "Gamma", include_str!("../configs/e099-gamma.conf"), 372, 4.88e-5, 5.60e-6),
                row("HTVI4", "Energy", include_str!("../configs/e099-energy.conf"), 383, 9.13e-6, 4.63e-6),
                row("HTVI4", "Arclength", include_str!("../configs/e099-arclength.conf"), 691, 1.31e-5, 1.49e-5),
                row("HTVI4", "-", include_str!("../configs/e099-fixed.conf"), 20000, 1.38e-1, 7.83e-1),
                row("SV", "-", include_str!("../configs/e099-sv.conf"), 20_000_000, 3.34e-6, 2.68e-5),
            ],
        }
    }
}

#[derive(Debug)]
pub struct RowOutcome {
    pub row: TableRow,
    pub result: Result<RunSummary>,
}

/// Runs every row on its own thread. A failing row does not stop the others.
pub fn run_rows(rows: Vec<TableRow>) -> Vec<RowOutcome> {
    thread::scope(|scope| {
        let handles: Vec<_> = rows
            .into_iter()
            .map(|row| {
                scope.spawn(move || {
                    let result = run_with(&row.config, |_| Ok(()));
                    RowOutcome { row, result }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("table row panicked")).collect()
    })
}

pub fn run_table(preset: Preset) -> Vec<RowOutcome> {
    run_rows(preset.rows())
}

fn fmt_bound(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x}"))
}

/// Fixed-width table with the published step count and errors alongside.
pub fn render(title: &str, outcomes: &[RowOutcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "{:<6} {:<9} {:>7} {:>10} {:>10} {:>8} {:>6} {:>12} {:>12} {:>9} {:>8} | {:>9} {:>10} {:>10}",
        "Method",
        "Monitor",
        "h",
        "min Step",
        "max Step",
        "min g",
        "max g",
        "Energy Err",
        "Global Err",
        "Steps",
        "Time",
        "pub Steps",
        "pub Energy",
        "pub Global"
    );
    for o in outcomes {
        let bounds = o.row.config.g_bounds();
        let (a, b) = (fmt_bound(bounds.map(|b| b.0)), fmt_bound(bounds.map(|b| b.1)));
        let p = o.row.published;
        let tail = format!("{:>9} {:>10.2e} {:>10.2e}", p.steps, p.energy_error, p.global_error);
        match &o.result {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{:<6} {:<9} {:>7} {:>10.4e} {:>10.4e} {:>8} {:>6} {:>12.2e} {:>12.2e} {:>9} {:>8.2} | {tail}",
                    o.row.method,
                    o.row.monitor,
                    o.row.config.h,
                    s.min_step,
                    s.max_step,
                    a,
                    b,
                    s.max_energy_error,
                    s.global_error,
                    s.steps,
                    s.wall_time
                );
            }
            Err(e) => {
                let _ = writeln!(
                    out,
                    "{:<6} {:<9} {:>7} failed: {e} | {tail}",
                    o.row.method, o.row.monitor, o.row.config.h
                );
            }
        }
    }
    out
}
