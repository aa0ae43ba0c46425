//! Experiment harness for the `polyak-core` optimizers: a line-oriented
//! config format, deterministic parallel execution with CSV logging, and
//! window-median aggregation across seeds.
//!
//! The `polyak` binary exposes four commands: `run` (one grid point per
//! config section), `sweep` (Cartesian grid over methods, penalties, and
//! initial steps), `summarize` (collapse a log over an epoch window), and
//! `sigma2` (interpolation-gap table for a generated least-squares
//! problem).

pub mod config;
pub mod run;
pub mod summary;

pub use config::{
    parse_config, parse_sigma2_config, HarnessError, MethodName, ProblemSpec, Result, RunSection,
    ScheduleKind, SigmaConfig,
};
pub use run::{
    build_objective, execute_config, execute_section, render_csv, run_id, sigma2_table,
    CompletedRun, CSV_HEADER,
};
pub use summary::{summarize_csv, Window, SUMMARY_HEADER};
