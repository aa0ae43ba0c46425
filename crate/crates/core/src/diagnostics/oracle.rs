//! Brute-force minimizer for the per-step model subproblems, used to check
//! the closed-form updates from the outside.
//!
//! The search combines three independent stages and returns whichever
//! candidate scores best on the true subproblem objective:
//!
//! 1. a coarse grid over a box guaranteed to contain the minimizer,
//! 2. pattern-search refinement from the best grid point,
//! 3. exhaustive stationarity enumeration: every combination of clip state
//!    (model below its floor / above it / exactly on it) and, for box
//!    penalties, per-coordinate face activity, reduced to a candidate point
//!    and scored.
//!
//! Stage 3 makes the result exact to floating-point accuracy — kinked
//! valleys created by the clip and by box faces defeat direction-based
//! search, which stalls at the point where no trial direction descends.
//! Stages 1–2 stay in as a gross-error backstop with no algebra in common
//! with stage 3.

use crate::error::{Error, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

/// The per-step models whose minimizers the update rules claim to produce.
#[derive(Clone, Debug)]
pub enum SubproblemModel {
    /// Plain linearization `fval + ⟨g, y − x0⟩` (gradient-style updates).
    Linear { fval: f64, g: ParamVector },
    /// Linearization clipped from below at `c_lower`
    /// (Polyak-style updates).
    Truncated {
        fval: f64,
        c_lower: f64,
        g: ParamVector,
    },
}

impl SubproblemModel {
    /// Model value at `y`, linearized around `x0`.
    pub fn value(&self, x0: &ParamVector, y: &ParamVector) -> f64 {
        match self {
            SubproblemModel::Linear { fval, g } => fval + g.dot(y) - g.dot(x0),
            SubproblemModel::Truncated { fval, c_lower, g } => {
                (fval + g.dot(y) - g.dot(x0)).max(*c_lower)
            }
        }
    }

    fn gradient_vector(&self) -> &ParamVector {
        match self {
            SubproblemModel::Linear { g, .. } => g,
            SubproblemModel::Truncated { g, .. } => g,
        }
    }
}

/// Penalty shapes the brute-force search understands. Kept separate from
/// the runtime `Regularizer` trait on purpose: the search must know the
/// penalty's geometry (faces, curvature) to enumerate stationary points,
/// which a proximal-operator interface does not expose.
#[derive(Clone, Copy, Debug)]
pub enum PenaltyModel {
    /// No penalty.
    None,
    /// `(lambda/2)‖y‖²`.
    SquaredNorm { lambda: f64 },
    /// Indicator of `[lo, hi]^n`.
    Box { lo: f64, hi: f64 },
}

impl PenaltyModel {
    pub fn value(&self, y: &ParamVector) -> f64 {
        match *self {
            PenaltyModel::None => 0.0,
            PenaltyModel::SquaredNorm { lambda } => 0.5 * lambda * y.norm_sq(),
            PenaltyModel::Box { lo, hi } => {
                if y.data().iter().all(|&v| lo <= v && v <= hi) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn curvature(&self) -> f64 {
        match *self {
            PenaltyModel::SquaredNorm { lambda } => lambda,
            _ => 0.0,
        }
    }
}

/// Search settings for [`brute_force_subproblem_min`].
#[derive(Clone, Copy, Debug)]
pub struct GridSearchConfig {
    /// Coarse-grid resolution per dimension.
    pub points_per_dim: usize,
    /// Half-width of the search box around the anchor; `None` picks a box
    /// guaranteed to contain the minimizer for the supported penalties.
    pub half_width: Option<f64>,
    /// Spatial resolution of the refinement stage.
    pub tol: f64,
    /// Seed for the extra random search directions.
    pub seed: u64,
    /// Cap on refinement sweeps; the enumeration stage supplies the final
    /// precision, so refinement only needs to rule out gross errors.
    pub max_sweeps: usize,
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        GridSearchConfig {
            points_per_dim: 9,
            half_width: None,
            tol: 1e-8,
            seed: 0,
            max_sweeps: 60,
        }
    }
}

/// Exhaustive search is only affordable in a handful of dimensions.
pub const BRUTE_FORCE_DIM_LIMIT: usize = 5;

/// Minimize `model(y) + penalty(y) + ‖y − x0‖²/(2 alpha)`.
pub fn brute_force_subproblem_min(
    model: &SubproblemModel,
    x0: &ParamVector,
    alpha: f64,
    penalty: &PenaltyModel,
    cfg: &GridSearchConfig,
) -> Result<ParamVector> {
    let dim = x0.len();
    if dim > BRUTE_FORCE_DIM_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: BRUTE_FORCE_DIM_LIMIT,
        });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "proximal weight must be positive and finite, got {alpha}"
        )));
    }
    if let PenaltyModel::Box { lo, hi } = penalty {
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!(
                "box bounds out of order: [{lo}, {hi}]"
            )));
        }
    }
    let g = model.gradient_vector();
    x0.check_same_layout(g)?;
    if cfg.points_per_dim < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least two points per dimension".into(),
        ));
    }

    let objective = |y: &ParamVector| -> f64 {
        model.value(x0, y) + penalty.value(y) + y.dist_sq(x0) / (2.0 * alpha)
    };

    // The minimizer cannot sit further from the anchor than a full model
    // step plus whatever pull the penalty exerts (bounded by the anchor
    // norm for shrinkage- and projection-type penalties).
    let half_width = cfg
        .half_width
        .unwrap_or_else(|| alpha * g.norm() + x0.norm() + 1.0);

    // Stage 1: coarse grid over the box, plus the anchor and the origin as
    // seed candidates (a tight box penalty can slip between grid nodes, and
    // such boxes always contain the origin in this library's usage).
    let mut best = x0.clone();
    let mut best_val = objective(&best);
    let origin = ParamVector::zeros(x0.layout().clone());
    let origin_val = objective(&origin);
    if origin_val < best_val {
        best_val = origin_val;
        best = origin;
    }
    let m = cfg.points_per_dim;
    let mut counters = vec![0usize; dim];
    let mut probe = x0.clone();
    loop {
        for i in 0..dim {
            let frac = counters[i] as f64 / (m - 1) as f64;
            probe.data_mut()[i] = x0.data()[i] - half_width + 2.0 * half_width * frac;
        }
        let v = objective(&probe);
        if v < best_val {
            best_val = v;
            best = probe.clone();
        }
        // odometer increment
        let mut carry = 0;
        loop {
            counters[carry] += 1;
            if counters[carry] < m {
                break;
            }
            counters[carry] = 0;
            carry += 1;
            if carry == dim {
                break;
            }
        }
        if carry == dim {
            break;
        }
    }

    // Stage 2: pattern search. Directions: axes, pairwise diagonals, the
    // model gradient, the same vectors orthogonalized against the gradient
    // (moves that keep the linearization constant and so walk along the
    // clip boundary), and a batch of random directions refreshed on every
    // halving.
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut d = vec![0.0; dim];
        d[i] = 1.0;
        dirs.push(d);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; dim];
                let s = std::f64::consts::FRAC_1_SQRT_2;
                d[i] = s;
                d[j] = sign * s;
                dirs.push(d);
            }
        }
    }
    let g_norm = g.norm();
    let g_unit: Option<Vec<f64>> =
        (g_norm > 0.0).then(|| g.data().iter().map(|v| v / g_norm).collect());
    if let Some(gu) = &g_unit {
        let orthogonalized: Vec<Vec<f64>> = dirs
            .iter()
            .filter_map(|d| {
                let proj: f64 = d.iter().zip(gu).map(|(a, b)| a * b).sum();
                let mut t: Vec<f64> = d.iter().zip(gu).map(|(a, b)| a - proj * b).collect();
                let n = t.iter().map(|v| v * v).sum::<f64>().sqrt();
                (n > 1e-12).then(|| {
                    for v in &mut t {
                        *v /= n;
                    }
                    t
                })
            })
            .collect();
        dirs.extend(orthogonalized);
        dirs.push(gu.clone());
    }

    let mut rng = RngStream::substream(cfg.seed, 0x6f7261636c65); // arbitrary fixed tag
    let mut random_dirs: Vec<Vec<f64>> = Vec::new();
    let refresh_randoms = |rng: &mut RngStream, out: &mut Vec<Vec<f64>>| {
        out.clear();
        for _ in 0..8 {
            let mut d: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                for v in &mut d {
                    *v /= n;
                }
                out.push(d);
            }
        }
    };
    refresh_randoms(&mut rng, &mut random_dirs);

    let mut step = 2.0 * half_width / (m - 1) as f64;
    let floor = cfg.tol * 0.1;
    let mut candidate = best.clone();
    let mut sweeps = 0usize;
    while step > floor && sweeps < cfg.max_sweeps && best_val.is_finite() {
        sweeps += 1;
        let mut improved = false;
        for d in dirs.iter().chain(random_dirs.iter()) {
            for sign in [1.0, -1.0] {
                for (i, di) in d.iter().enumerate() {
                    candidate.data_mut()[i] = best.data()[i] + sign * step * di;
                }
                let v = objective(&candidate);
                if v < best_val {
                    best_val = v;
                    std::mem::swap(&mut best, &mut candidate);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            refresh_randoms(&mut rng, &mut random_dirs);
        }
    }

    // Stage 3: stationarity enumeration. With clip weight `u` fixed and a
    // box-face assignment fixed, the remaining problem is an unconstrained
    // strongly convex quadratic whose minimizer is written down directly:
    // free coordinates sit at `(x0 − u·alpha·g)/(1 + alpha·lambda)`, clamped
    // ones on their face. The clip-boundary weight solves the linear
    // equation `linearization(y(u)) = floor`. Every consistent combination
    // yields one candidate; scoring them with the true objective keeps the
    // result honest even if a combination is inapplicable.
    let lambda = penalty.curvature();
    let shrink = 1.0 / (1.0 + alpha * lambda);
    let face_states: usize = match *penalty {
        PenaltyModel::Box { .. } => 3,
        _ => 1,
    };
    let mut face_counters = vec![0usize; dim];
    let scored = |y: ParamVector, best: &mut ParamVector, best_val: &mut f64| {
        let v = objective(&y);
        if v < *best_val {
            *best_val = v;
            *best = y;
        }
    };
    loop {
        // Build the free/clamped split for this face assignment.
        let mut y = x0.clone();
        let mut free_gsq = 0.0;
        let mut free_gx = 0.0;
        let mut clamped_lin = 0.0;
        for i in 0..dim {
            match (face_counters[i], *penalty) {
                (1, PenaltyModel::Box { lo, .. }) => {
                    y.data_mut()[i] = lo;
                    clamped_lin += g.data()[i] * (lo - x0.data()[i]);
                }
                (2, PenaltyModel::Box { hi, .. }) => {
                    y.data_mut()[i] = hi;
                    clamped_lin += g.data()[i] * (hi - x0.data()[i]);
                }
                _ => {
                    free_gsq += g.data()[i] * g.data()[i];
                    free_gx += g.data()[i] * x0.data()[i];
                }
            }
        }

        let mut weights: Vec<f64> = match model {
            SubproblemModel::Linear { .. } => vec![1.0],
            SubproblemModel::Truncated { .. } => vec![0.0, 1.0],
        };
        if let SubproblemModel::Truncated { fval, c_lower, .. } = model {
            // linearization(y(u)) = c_lower, linear in u on the free coords:
            // fval + clamped_lin + shrink·(−u·alpha·free_gsq − alpha·lambda·free_gx) = c_lower
            if free_gsq > 0.0 {
                let u = ((fval + clamped_lin - c_lower) / shrink - alpha * lambda * free_gx)
                    / (alpha * free_gsq);
                if (-1e-9..=1.0 + 1e-9).contains(&u) {
                    weights.push(u.clamp(0.0, 1.0));
                }
            }
        }

        for &u in &weights {
            let mut cand = y.clone();
            for i in 0..dim {
                if face_counters[i] == 0 {
                    cand.data_mut()[i] = (x0.data()[i] - u * alpha * g.data()[i]) * shrink;
                }
            }
            scored(cand, &mut best, &mut best_val);
        }

        if face_states == 1 {
            break;
        }
        let mut carry = 0;
        loop {
            face_counters[carry] += 1;
            if face_counters[carry] < face_states {
                break;
            }
            face_counters[carry] = 0;
            carry += 1;
            if carry == dim {
                break;
            }
        }
        if carry == dim {
            break;
        }
    }

    if !best_val.is_finite() {
        return Err(Error::InvalidArgument(
            "no candidate with a finite objective was found; the penalty's feasible set \
             appears to be empty or unreachable"
                .into(),
        ));
    }
    Ok(best)
}
