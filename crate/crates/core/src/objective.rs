//! The interface stochastic optimizers program against, plus the truncated
//! linear model that Polyak-type step sizes minimize in closed form.

use crate::batch::Batch;
use crate::error::Result;
use crate::param::ParamVector;

/// A finite-sum loss `f(x) = (1/N) Σ_i f(x; s_i)` exposed through mini-batch
/// value and gradient oracles.
///
/// `value`/`gradient` average over the given batch. `lower_bound` returns a
/// number `C(S)` with `C(S) ≤ inf f(·; S)`; the default of `0` is exact for
/// the non-negative losses shipped in this crate whenever the batch loss can
/// reach zero, and is a valid lower bound for them always.
pub trait StochasticObjective {
    fn value(&self, x: &ParamVector, batch: &Batch) -> f64;

    fn gradient(&self, x: &ParamVector, batch: &Batch) -> ParamVector;

    fn lower_bound(&self, _batch: &Batch) -> f64 {
        0.0
    }

    fn dataset_size(&self) -> usize;

    /// Average loss over the entire dataset.
    fn full_value(&self, x: &ParamVector) -> f64 {
        self.value(x, &Batch::all(self.dataset_size()))
    }

    /// Gradient of the average loss over the entire dataset.
    fn full_gradient(&self, x: &ParamVector) -> ParamVector {
        self.gradient(x, &Batch::all(self.dataset_size()))
    }

    /// Lipschitz constant of the full gradient, when the problem knows one.
    fn smoothness_constant(&self) -> Option<f64> {
        None
    }

    /// Deterministic starting point for optimization runs.
    fn initial_point(&self) -> ParamVector;

    /// Problem-specific held-out metric (e.g. validation loss), if any.
    fn validation_metric(&self, _x: &ParamVector) -> Option<f64> {
        None
    }
}

/// Value of the truncated linearization of `f(·; S)` anchored at `x`,
/// evaluated at `y`:
///
/// `max{ f(x; S) + ⟨g, y − x⟩, C(S) }`  with `g = ∇f(x; S)`.
///
/// This piecewise-linear model underestimates any convex batch loss and
/// touches it at `y = x` whenever `f(x; S) ≥ C(S)`.
pub fn truncated_model_value(
    objective: &dyn StochasticObjective,
    x: &ParamVector,
    y: &ParamVector,
    batch: &Batch,
) -> Result<f64> {
    x.check_same_layout(y)?;
    let fval = objective.value(x, batch);
    let g = objective.gradient(x, batch);
    let lin = fval + g.dot(y) - g.dot(x);
    Ok(lin.max(objective.lower_bound(batch)))
}
