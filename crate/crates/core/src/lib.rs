//! Stochastic optimization with Polyak-type adaptive step sizes for
//! regularized empirical-risk problems, together with the synthetic
//! problems, reference oracles, and convergence certificates used to
//! validate the update rules.
//!
//! The update rules all step on a mini-batch linearization of the loss,
//! clipped from below at a known lower bound; they differ in how the
//! penalty enters (folded into the loss, handled by a proximal map, or
//! built into the per-step subproblem).

pub mod batch;
pub mod diagnostics;
pub mod error;
pub mod objective;
pub mod optim;
pub mod param;
pub mod problems;
pub mod prox;
pub mod reg;
pub mod rng;

pub use batch::{make_minibatches, Batch};
pub use error::{Error, Result};
pub use objective::{truncated_model_value, StochasticObjective};
pub use param::{Layout, ParamVector};
pub use reg::{BoxReg, L2Reg, Regularizer, ZeroReg};
pub use rng::RngStream;
