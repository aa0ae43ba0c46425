//! Epoch-structured optimization runs with per-step and per-epoch logging.

use crate::batch::{make_minibatches, Batch};
use crate::error::{Error, Result};
use crate::objective::StochasticObjective;
use crate::param::ParamVector;
use crate::reg::Regularizer;
use crate::rng::RngStream;

use super::schedule::Schedule;
use super::step::{
    decsps_step, prox_sgd_step, proxsps_general_step, proxsps_l2_step, sgd_step, sps_step,
    DecSpsState, StepRecord,
};

/// Iterate-norm threshold beyond which a run is declared diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Which update rule drives the run.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Gradient descent on the loss with the penalty folded in.
    Sgd,
    /// Proximal gradient: plain step on the loss, prox of the penalty.
    ProxSgd,
    /// Capped Polyak step on the folded loss; `c_scale = 1` is the plain rule.
    Sps { c_scale: f64 },
    /// Decreasing Polyak step on the folded loss. `c0` scales the
    /// `sqrt(k+1)` normalization sequence; `gamma_init` seeds the running
    /// cap (defaults to the schedule value at `k = 0`).
    DecSps { c0: f64, gamma_init: Option<f64> },
    /// Polyak step with the squared-norm penalty handled in closed form.
    ProxSpsL2,
    /// Polyak step with the penalty handled through the truncated proximal
    /// subproblem (any regularizer).
    ProxSpsGeneral,
}

impl Method {
    /// Folding methods bake the penalty into the loss; prox methods keep it
    /// outside.
    fn folds_regularizer(&self) -> bool {
        matches!(self, Method::Sgd | Method::Sps { .. } | Method::DecSps { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::ProxSgd => "prox_sgd",
            Method::Sps { .. } => "sps",
            Method::DecSps { .. } => "decsps",
            Method::ProxSpsL2 => "proxsps",
            Method::ProxSpsGeneral => "proxsps_general",
        }
    }
}

/// Everything that defines a run apart from the problem, penalty, and seed.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub method: Method,
    pub schedule: Schedule,
    pub epochs: usize,
    pub batch_size: usize,
    /// Keep every iterate (`x^0 … x^K`) in the result; off by default
    /// because trajectories dwarf the metric logs.
    pub record_trajectory: bool,
}

impl RunSettings {
    pub fn new(method: Method, schedule: Schedule, epochs: usize, batch_size: usize) -> Self {
        RunSettings {
            method,
            schedule,
            epochs,
            batch_size,
            record_trajectory: false,
        }
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }
}

/// End-of-epoch metrics. Medians are `NaN` for epochs where the quantity
/// never materialized (e.g. rules that define no Polyak ratio).
#[derive(Clone, Debug)]
pub struct EpochRow {
    /// Epoch index, 1-based.
    pub epoch: usize,
    /// Full composite objective: average loss plus penalty.
    pub objective: f64,
    /// Average loss over the training set.
    pub train_loss: f64,
    /// Problem-supplied held-out metric; falls back to `train_loss`.
    pub val_metric: f64,
    pub param_norm: f64,
    /// Median Polyak ratio over the epoch's steps.
    pub zeta_median: f64,
    /// Median applied step over the epoch's steps.
    pub step_median: f64,
    pub diverged: bool,
}

/// Outcome of [`run_optimizer`].
#[derive(Clone, Debug)]
pub struct RunResult {
    pub x_final: ParamVector,
    pub steps: Vec<StepRecord>,
    pub epoch_rows: Vec<EpochRow>,
    pub diverged: bool,
    pub trajectory: Option<Vec<ParamVector>>,
}

/// A loss with a differentiable penalty folded in: value gains
/// `phi(x)`, gradients gain `∇phi(x)`, and (for a genuinely regularized
/// fold) the batch lower bound drops to 0, since the folded batch loss is
/// nonnegative for the nonnegative losses this crate ships but its infimum
/// is no longer the loss's own.
pub struct FoldedObjective<'a> {
    inner: &'a dyn StochasticObjective,
    reg: &'a dyn Regularizer,
}

impl<'a> FoldedObjective<'a> {
    /// Errors when the penalty has no gradient to fold.
    pub fn new(
        inner: &'a dyn StochasticObjective,
        reg: &'a dyn Regularizer,
    ) -> Result<FoldedObjective<'a>> {
        let probe = inner.initial_point();
        if reg.grad(&probe).is_none() {
            return Err(Error::InvalidArgument(
                "this method folds the penalty into the loss and needs a differentiable regularizer"
                    .into(),
            ));
        }
        Ok(FoldedObjective { inner, reg })
    }

    fn is_trivial(&self) -> bool {
        // A fold with an identically-zero penalty changes nothing; keep the
        // inner lower bound in that case.
        self.reg.l2_modulus() == Some(0.0)
    }
}

impl StochasticObjective for FoldedObjective<'_> {
    fn value(&self, x: &ParamVector, batch: &Batch) -> f64 {
        self.inner.value(x, batch) + self.reg.value(x)
    }

    fn gradient(&self, x: &ParamVector, batch: &Batch) -> ParamVector {
        let mut g = self.inner.gradient(x, batch);
        let pg = self.reg.grad(x).expect("checked at construction");
        g.add_scaled(1.0, &pg);
        g
    }

    fn lower_bound(&self, batch: &Batch) -> f64 {
        if self.is_trivial() {
            self.inner.lower_bound(batch)
        } else {
            0.0
        }
    }

    fn dataset_size(&self) -> usize {
        self.inner.dataset_size()
    }

    fn initial_point(&self) -> ParamVector {
        self.inner.initial_point()
    }
}

fn median_of(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_unstable_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

fn epoch_row_from(
    epoch: usize,
    x: &ParamVector,
    objective: &dyn StochasticObjective,
    reg: &dyn Regularizer,
    records: &[StepRecord],
    diverged: bool,
) -> EpochRow {
    let train_loss = objective.full_value(x);
    let composite = train_loss + reg.value(x);
    let val_metric = objective.validation_metric(x).unwrap_or(train_loss);
    let zeta_median = median_of(records.iter().filter_map(|r| r.zeta).collect());
    let step_median = median_of(records.iter().map(|r| r.applied_step).collect());
    let sanitize = |v: f64| if diverged && !v.is_finite() { f64::INFINITY } else { v };
    EpochRow {
        epoch,
        objective: sanitize(composite),
        train_loss: sanitize(train_loss),
        val_metric: sanitize(val_metric),
        param_norm: sanitize(x.norm()),
        zeta_median,
        step_median,
        diverged,
    }
}

fn sentinel_row(epoch: usize) -> EpochRow {
    EpochRow {
        epoch,
        objective: f64::INFINITY,
        train_loss: f64::INFINITY,
        val_metric: f64::INFINITY,
        param_norm: f64::INFINITY,
        zeta_median: f64::NAN,
        step_median: f64::NAN,
        diverged: true,
    }
}

/// Run `settings.epochs` epochs of the chosen method from the objective's
/// initial point.
///
/// Each epoch reshuffles the dataset into `ceil(n / batch_size)` batches
/// using `rng`, which is the only source of randomness: identical seeds
/// give identical runs. Zero epochs return the initial point untouched.
/// A run whose iterate norm exceeds [`DIVERGENCE_NORM`] — or whose batch
/// loss stops being finite — ends early; its remaining epochs are padded
/// with rows flagged `diverged` carrying infinite metrics.
pub fn run_optimizer(
    objective: &dyn StochasticObjective,
    reg: &dyn Regularizer,
    settings: &RunSettings,
    rng: &mut RngStream,
) -> Result<RunResult> {
    let n = objective.dataset_size();
    if settings.epochs > 0 {
        // Surface batch-size problems before stepping.
        make_minibatches(n, settings.batch_size, &mut RngStream::new(0))?;
    }

    let folded;
    let step_objective: &dyn StochasticObjective = if settings.method.folds_regularizer() {
        folded = FoldedObjective::new(objective, reg)?;
        &folded
    } else {
        objective
    };

    let lambda = match settings.method {
        Method::ProxSpsL2 => reg.l2_modulus().ok_or_else(|| {
            Error::InvalidArgument(
                "the closed-form proximal Polyak step needs the squared-norm penalty; \
                 use the general method for other regularizers"
                    .into(),
            )
        })?,
        _ => 0.0,
    };

    let mut x = objective.initial_point();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut epoch_rows: Vec<EpochRow> = Vec::with_capacity(settings.epochs);
    let mut trajectory = settings.record_trajectory.then(|| vec![x.clone()]);
    let mut decsps_state: Option<DecSpsState> = None;
    let mut k = 0usize;
    let mut diverged = false;

    for epoch in 1..=settings.epochs {
        if diverged {
            epoch_rows.push(sentinel_row(epoch));
            continue;
        }
        let epoch_start = steps.len();
        let batches = make_minibatches(n, settings.batch_size, rng)?;
        for batch in &batches {
            let alpha = settings.schedule.alpha(k, epoch);
            let fval = step_objective.value(&x, batch);
            let c_lower = step_objective.lower_bound(batch);
            let g = step_objective.gradient(&x, batch);

            let (next, mut record) = match &settings.method {
                Method::Sgd => {
                    let next = sgd_step(&x, &g, alpha);
                    let mut r = StepRecord {
                        iter: 0,
                        alpha,
                        zeta: None,
                        applied_step: alpha,
                        loss_batch: fval,
                        grad_norm_sq: g.norm_sq(),
                        param_norm: 0.0,
                        lower_bound_violated: false,
                    };
                    r.param_norm = next.norm();
                    (next, r)
                }
                Method::ProxSgd => {
                    let next = prox_sgd_step(&x, &g, alpha, reg);
                    let mut r = StepRecord {
                        iter: 0,
                        alpha,
                        zeta: None,
                        applied_step: alpha,
                        loss_batch: fval,
                        grad_norm_sq: g.norm_sq(),
                        param_norm: 0.0,
                        lower_bound_violated: false,
                    };
                    r.param_norm = next.norm();
                    (next, r)
                }
                Method::Sps { c_scale } => sps_step(&x, fval, c_lower, &g, alpha, *c_scale),
                Method::DecSps { c0, gamma_init } => {
                    let c0 = *c0;
                    let state = decsps_state.get_or_insert_with(|| {
                        let gamma0 =
                            gamma_init.unwrap_or_else(|| settings.schedule.alpha(0, 1));
                        DecSpsState::new(c0, gamma0)
                    });
                    let cs = move |k: usize| c0 * ((k + 1) as f64).sqrt();
                    let (next, new_state, r) =
                        decsps_step(&x, fval, c_lower, &g, state, &cs);
                    *state = new_state;
                    (next, r)
                }
                Method::ProxSpsL2 => proxsps_l2_step(&x, fval, c_lower, &g, alpha, lambda),
                Method::ProxSpsGeneral => {
                    proxsps_general_step(&x, fval, c_lower, &g, alpha, reg)?
                }
            };

            record.iter = k;
            k += 1;
            x = next;
            if let Some(t) = trajectory.as_mut() {
                t.push(x.clone());
            }
            let finite = record.loss_batch.is_finite() && x.all_finite();
            steps.push(record);
            if !finite || x.norm() > DIVERGENCE_NORM {
                diverged = true;
                break;
            }
        }
        epoch_rows.push(epoch_row_from(
            epoch,
            &x,
            objective,
            reg,
            &steps[epoch_start..],
            diverged,
        ));
    }

    Ok(RunResult {
        x_final: x,
        steps,
        epoch_rows,
        diverged,
        trajectory,
    })
}
