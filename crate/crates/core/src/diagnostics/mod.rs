//! Verification instruments: envelope/stationarity measures, convergence
//! certificates, and a brute-force subproblem oracle for cross-checks.

mod envelope;
mod oracle;
mod rates;

pub use envelope::{gradient_mapping, moreau_env_grad, prox_of_composite, InnerSolveConfig};
pub use oracle::{
    brute_force_subproblem_min, GridSearchConfig, PenaltyModel, SubproblemModel,
    BRUTE_FORCE_DIM_LIMIT,
};
pub use rates::{
    estimate_beta, estimate_smoothness, evaluate_rate_bound, log_log_slope, RateCheckOutcome,
    RateCheckParams, RateKind, RateReference, RateRunData,
};
