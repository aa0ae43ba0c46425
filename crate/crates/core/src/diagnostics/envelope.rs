//! Stationarity measures for composite objectives: the Moreau-envelope
//! gradient and the proximal gradient mapping.

use crate::error::{Error, Result};
use crate::objective::StochasticObjective;
use crate::param::ParamVector;
use crate::reg::Regularizer;

/// Settings for the inner proximal-gradient solve behind
/// [`moreau_env_grad`].
#[derive(Clone, Copy, Debug)]
pub struct InnerSolveConfig {
    /// Lipschitz constant (or safe overestimate) of the loss gradient near
    /// the query point; sets the inner step size.
    pub smoothness_hint: f64,
    /// Stop once the inner gradient-mapping norm drops below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl InnerSolveConfig {
    pub fn new(smoothness_hint: f64) -> InnerSolveConfig {
        assert!(
            smoothness_hint > 0.0 && smoothness_hint.is_finite(),
            "smoothness hint must be positive and finite, got {smoothness_hint}"
        );
        InnerSolveConfig {
            smoothness_hint,
            tol: 1e-9,
            max_iters: 50_000,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0);
        self.tol = tol;
        self
    }
}

/// Gradient of the Moreau envelope of the composite `psi = f + phi` at `x`:
///
/// `∇env(x) = (x − x̂)/eta` with `x̂ = argmin_y psi(y) + ‖y − x‖²/(2 eta)`.
///
/// The argmin is found by proximal gradient on the strongly convex inner
/// problem with step `1/(L + 1/eta)`; `eta` must be small enough for that
/// problem to be convex (below the reciprocal of the loss's weak-convexity
/// modulus). Returns the envelope gradient and its norm.
pub fn moreau_env_grad(
    objective: &dyn StochasticObjective,
    reg: &dyn Regularizer,
    x: &ParamVector,
    eta: f64,
    inner: &InnerSolveConfig,
) -> Result<(ParamVector, f64)> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "envelope parameter must be positive and finite, got {eta}"
        )));
    }
    let x_hat = prox_of_composite(objective, reg, x, eta, inner)?;
    let mut g = x.clone();
    g.add_scaled(-1.0, &x_hat);
    g.scale_in_place(1.0 / eta);
    let norm = g.norm();
    Ok((g, norm))
}

/// The prox of the composite: `argmin_y f(y) + phi(y) + ‖y − x‖²/(2 eta)`.
pub fn prox_of_composite(
    objective: &dyn StochasticObjective,
    reg: &dyn Regularizer,
    x: &ParamVector,
    eta: f64,
    inner: &InnerSolveConfig,
) -> Result<ParamVector> {
    let step = 1.0 / (inner.smoothness_hint + 1.0 / eta);
    let mut y = x.clone();
    let mut last_residual = f64::INFINITY;
    for _ in 0..inner.max_iters {
        // smooth part: f(y) + ‖y − x‖²/(2 eta)
        let mut grad = objective.full_gradient(&y);
        grad.add_scaled(1.0 / eta, &y);
        grad.add_scaled(-1.0 / eta, x);
        let candidate = reg.prox(&y.combined(-step, &grad), step);
        let mapping_norm = candidate.dist_sq(&y).sqrt() / step;
        y = candidate;
        last_residual = mapping_norm;
        if mapping_norm <= inner.tol {
            return Ok(y);
        }
    }
    Err(Error::InnerSolveFailed {
        iterations: inner.max_iters,
        residual: last_residual,
    })
}

/// Proximal gradient mapping at step `eta`:
///
/// `G(x) = (x − prox_{eta·phi}(x − eta·∇f(x))) / eta`.
///
/// Vanishes exactly at composite stationary points; with the zero penalty it
/// reduces to the loss gradient.
pub fn gradient_mapping(
    objective: &dyn StochasticObjective,
    reg: &dyn Regularizer,
    x: &ParamVector,
    eta: f64,
) -> Result<(ParamVector, f64)> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mapping step must be positive and finite, got {eta}"
        )));
    }
    let grad = objective.full_gradient(x);
    let moved = reg.prox(&x.combined(-eta, &grad), eta);
    let mut g = x.clone();
    g.add_scaled(-1.0, &moved);
    g.scale_in_place(1.0 / eta);
    let norm = g.norm();
    Ok((g, norm))
}
