//! Experiment harness for the `poincare-vi` integrators: configuration,
//! single runs, convergence studies, table presets, symplecticity checks and
//! CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convergence;
pub mod csv;
pub mod error;
pub mod run;
pub mod symplecticity;
pub mod table;

pub use config::{IntegratorKind, MonitorKind, ProblemKind, RunConfig};
pub use error::{HarnessError, Result};
pub use run::{run, run_with, RunSummary};
