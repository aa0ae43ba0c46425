//! Step-size schedules, update rules, and the optimization run loop.

mod runner;
mod schedule;
mod step;

pub use runner::{
    run_optimizer, EpochRow, FoldedObjective, Method, RunResult, RunSettings, DIVERGENCE_NORM,
};
pub use schedule::Schedule;
pub use step::{
    decsps_step, default_c_schedule, prox_sgd_step, proxsps_general_step, proxsps_l2_step,
    sgd_step, sps_step, DecSpsState, StepRecord,
};
