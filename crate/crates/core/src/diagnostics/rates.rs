//! Convergence certificates: evaluate the guaranteed bound for a run under
//! a given step-size regime and compare it against the measured quantity.

use crate::batch::Batch;
use crate::error::{Error, Result};
use crate::objective::StochasticObjective;
use crate::optim::Schedule;
use crate::param::ParamVector;
use crate::rng::RngStream;

/// Which guarantee to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateKind {
    /// Constant step cap on a strongly convex composite: the distance to the
    /// minimizer contracts linearly down to a noise floor.
    ConstantContraction,
    /// Caps `1/(lambda (k + k0))` with an l2 penalty of modulus `lambda`:
    /// the averaged iterate closes the objective gap at rate `~ log K / K`.
    RegularizedAverage,
    /// Caps `alpha0/sqrt(k+1)` on a convex composite: the step-weighted
    /// average closes the objective gap at rate `~ log K / sqrt(K)`.
    SqrtAverage,
    /// Caps `alpha0/sqrt(k+1)` on a weakly convex loss: the smallest
    /// envelope-gradient norm seen decays at rate `~ log K / sqrt(K)`.
    EnvelopeStationarity,
}

/// Problem- and run-level constants the certificates depend on.
#[derive(Clone, Copy, Debug)]
pub struct RateCheckParams {
    /// Smoothness constant `L` of the (expected) loss gradient.
    pub smoothness: f64,
    /// Strong-convexity modulus of the loss itself (0 when merely convex).
    pub strong_convexity: f64,
    /// l2 modulus of the penalty (0 when absent).
    pub reg_modulus: f64,
    /// Upper bound on the gradient-variance level of the sampling scheme.
    pub noise_bound: f64,
    /// Slack factor `> 1` in the step cap `(1 − 1/theta)/L`.
    pub theta: f64,
    /// Weak-convexity modulus `rho` of the loss (`EnvelopeStationarity` only).
    pub weak_convexity: f64,
    /// Envelope parameter `eta` (`EnvelopeStationarity` only).
    pub envelope_eta: f64,
}

impl RateCheckParams {
    /// Largest constant cap the smooth-case certificates admit.
    pub fn alpha_cap(&self) -> f64 {
        (1.0 - 1.0 / self.theta) / self.smoothness
    }

    /// Largest cap the envelope certificate admits (tighter: the inner
    /// quadratic adds `1/eta` to the curvature).
    pub fn envelope_alpha_cap(&self) -> f64 {
        (1.0 - 1.0 / self.theta) / (self.smoothness + 1.0 / self.envelope_eta)
    }

    fn validate_common(&self) -> Result<()> {
        if !(self.smoothness > 0.0) || !self.smoothness.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "smoothness constant must be positive and finite, got {}",
                self.smoothness
            )));
        }
        if !(self.theta > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "step-cap slack theta must exceed 1, got {}",
                self.theta
            )));
        }
        if self.strong_convexity < 0.0 || self.reg_modulus < 0.0 || self.noise_bound < 0.0 {
            return Err(Error::InvalidArgument(
                "moduli and noise bound must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Trajectories (one per seed, `x^0..x^K` inclusive) and, for the
/// stationarity check, a seed-averaged series of squared envelope-gradient
/// norms sampled at selected iteration counts.
#[derive(Clone, Debug, Default)]
pub struct RateRunData {
    pub trajectories: Vec<Vec<ParamVector>>,
    pub env_grad_sq: Vec<(usize, f64)>,
}

/// Reference quantities the bounds are anchored to.
#[derive(Clone, Debug, Default)]
pub struct RateReference {
    /// Minimizer of the composite (distance-based and gap-based checks).
    pub x_star: Option<ParamVector>,
    /// Optimal composite value (gap-based checks); computed from `x_star`
    /// via the supplied evaluator when absent.
    pub psi_star: Option<f64>,
    /// Envelope value at the start point (stationarity check).
    pub env_start: Option<f64>,
    /// Any lower bound on the composite (stationarity check); defaults to 0.
    pub psi_lower: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct RateCheckOutcome {
    pub bound: f64,
    pub measured: f64,
    pub holds: bool,
}

const BOUND_SLACK: f64 = 1.0 + 1e-9;
const STEP_CAP_SLACK: f64 = 1.0 + 1e-12;

fn require_trajectories(data: &RateRunData) -> Result<usize> {
    if data.trajectories.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one trajectory is required".into(),
        ));
    }
    let len = data.trajectories[0].len();
    if len < 2 {
        return Err(Error::InvalidArgument(
            "trajectories must contain the start point and at least one iterate".into(),
        ));
    }
    for t in &data.trajectories {
        if t.len() != len {
            return Err(Error::InvalidArgument(
                "all trajectories must have the same length".into(),
            ));
        }
    }
    Ok(len - 1)
}

fn mean_start_dist_sq(data: &RateRunData, x_star: &ParamVector) -> f64 {
    let mut acc = 0.0;
    for t in &data.trajectories {
        acc += t[0].dist_sq(x_star);
    }
    acc / data.trajectories.len() as f64
}

fn require_x_star<'a>(reference: &'a RateReference) -> Result<&'a ParamVector> {
    reference.x_star.as_ref().ok_or_else(|| {
        Error::InvalidArgument("this certificate needs the reference minimizer".into())
    })
}

/// Evaluate the certificate of `kind` for runs produced under `schedule`.
///
/// `psi` must evaluate the full composite objective (loss plus penalty).
/// The outcome reports the theoretical bound, the measured quantity, and
/// whether the bound holds up to a tiny relative slack. Schedule and
/// parameter preconditions of the certificate are enforced and violations
/// surface as errors naming the failed condition.
pub fn evaluate_rate_bound(
    kind: RateKind,
    params: &RateCheckParams,
    schedule: &Schedule,
    data: &RateRunData,
    reference: &RateReference,
    psi: &dyn Fn(&ParamVector) -> f64,
) -> Result<RateCheckOutcome> {
    params.validate_common()?;
    match kind {
        RateKind::ConstantContraction => constant_contraction(params, schedule, data, reference),
        RateKind::RegularizedAverage => regularized_average(params, schedule, data, reference, psi),
        RateKind::SqrtAverage => sqrt_average(params, schedule, data, reference, psi),
        RateKind::EnvelopeStationarity => envelope_stationarity(params, schedule, data, reference),
    }
}

fn constant_contraction(
    params: &RateCheckParams,
    schedule: &Schedule,
    data: &RateRunData,
    reference: &RateReference,
) -> Result<RateCheckOutcome> {
    let alpha = match schedule {
        Schedule::Constant { alpha0 } => *alpha0,
        other => {
            return Err(Error::StepCondition(format!(
                "contraction certificate needs a constant schedule, got {other:?}"
            )))
        }
    };
    let cap = params.alpha_cap();
    if alpha > cap * STEP_CAP_SLACK {
        return Err(Error::StepCondition(format!(
            "constant step {alpha} exceeds the cap (1 - 1/theta)/L = {cap}"
        )));
    }
    let curvature = params.strong_convexity + 2.0 * params.reg_modulus;
    if !(curvature > 0.0) {
        return Err(Error::InvalidArgument(
            "contraction certificate needs strong convexity in the loss or the penalty".into(),
        ));
    }
    let k = require_trajectories(data)?;
    let x_star = require_x_star(reference)?;
    let d0 = mean_start_dist_sq(data, x_star);
    let mut measured = 0.0;
    for t in &data.trajectories {
        measured += t[k].dist_sq(x_star);
    }
    measured /= data.trajectories.len() as f64;
    let bound = (1.0 + alpha * curvature).powi(-(k as i32)) * d0
        + params.theta * params.noise_bound * alpha / curvature;
    Ok(RateCheckOutcome {
        bound,
        measured,
        holds: measured <= bound * BOUND_SLACK,
    })
}

fn regularized_average(
    params: &RateCheckParams,
    schedule: &Schedule,
    data: &RateRunData,
    reference: &RateReference,
    psi: &dyn Fn(&ParamVector) -> f64,
) -> Result<RateCheckOutcome> {
    let lambda = params.reg_modulus;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(
            "averaged-gap certificate needs a positive l2 modulus".into(),
        ));
    }
    let k0 = match schedule {
        Schedule::StrongDecay {
            lambda: sched_lambda,
            k0,
        } => {
            if (sched_lambda - lambda).abs() > 1e-12 * lambda.max(1.0) {
                return Err(Error::StepCondition(format!(
                    "schedule modulus {sched_lambda} differs from the penalty modulus {lambda}"
                )));
            }
            *k0
        }
        other => {
            return Err(Error::StepCondition(format!(
                "averaged-gap certificate needs the 1/(lambda (k + k0)) schedule, got {other:?}"
            )))
        }
    };
    let cap = params.alpha_cap();
    let alpha0 = 1.0 / (lambda * k0);
    if alpha0 > cap * STEP_CAP_SLACK {
        return Err(Error::StepCondition(format!(
            "initial step 1/(lambda k0) = {alpha0} exceeds the cap (1 - 1/theta)/L = {cap}"
        )));
    }
    let k = require_trajectories(data)?;
    let x_star = require_x_star(reference)?;
    let psi_star = reference.psi_star.unwrap_or_else(|| psi(x_star));
    let d0 = mean_start_dist_sq(data, x_star);

    let mut measured = 0.0;
    for t in &data.trajectories {
        let mut avg = ParamVector::zeros(t[0].layout().clone());
        for point in &t[1..] {
            avg.add_scaled(1.0, point);
        }
        avg.scale_in_place(1.0 / k as f64);
        measured += psi(&avg) - psi_star;
    }
    measured /= data.trajectories.len() as f64;

    let kf = k as f64;
    let bound = lambda * k0 * d0 / (2.0 * kf)
        + params.theta * params.noise_bound * (1.0 + kf.ln()) / (2.0 * lambda * kf);
    Ok(RateCheckOutcome {
        bound,
        measured,
        holds: measured <= bound * BOUND_SLACK,
    })
}

fn sqrt_average(
    params: &RateCheckParams,
    schedule: &Schedule,
    data: &RateRunData,
    reference: &RateReference,
    psi: &dyn Fn(&ParamVector) -> f64,
) -> Result<RateCheckOutcome> {
    let alpha0 = match schedule {
        Schedule::SqrtIter { alpha0 } => *alpha0,
        other => {
            return Err(Error::StepCondition(format!(
                "sqrt-average certificate needs the alpha0/sqrt(k+1) schedule, got {other:?}"
            )))
        }
    };
    let cap = params.alpha_cap();
    if alpha0 > cap * STEP_CAP_SLACK {
        return Err(Error::StepCondition(format!(
            "base step {alpha0} exceeds the cap (1 - 1/theta)/L = {cap}"
        )));
    }
    let k = require_trajectories(data)?;
    let x_star = require_x_star(reference)?;
    let psi_star = reference.psi_star.unwrap_or_else(|| psi(x_star));
    let d0 = mean_start_dist_sq(data, x_star);

    let mut measured = 0.0;
    for t in &data.trajectories {
        let mut avg = ParamVector::zeros(t[0].layout().clone());
        let mut weight_sum = 0.0;
        for (step_idx, point) in t[1..].iter().enumerate() {
            let w = 1.0 / ((step_idx + 1) as f64).sqrt();
            avg.add_scaled(w, point);
            weight_sum += w;
        }
        avg.scale_in_place(1.0 / weight_sum);
        measured += psi(&avg) - psi_star;
    }
    measured /= data.trajectories.len() as f64;

    let kf = k as f64;
    let denom = 4.0 * ((kf + 1.0).sqrt() - 1.0);
    let bound = d0 / (alpha0 * denom)
        + params.theta * params.noise_bound * alpha0 * (1.0 + kf.ln()) / denom;
    Ok(RateCheckOutcome {
        bound,
        measured,
        holds: measured <= bound * BOUND_SLACK,
    })
}

fn envelope_stationarity(
    params: &RateCheckParams,
    schedule: &Schedule,
    data: &RateRunData,
    reference: &RateReference,
) -> Result<RateCheckOutcome> {
    let alpha0 = match schedule {
        Schedule::SqrtIter { alpha0 } => *alpha0,
        other => {
            return Err(Error::StepCondition(format!(
                "stationarity certificate needs the alpha0/sqrt(k+1) schedule, got {other:?}"
            )))
        }
    };
    let eta = params.envelope_eta;
    let rho = params.weak_convexity;
    let lambda = params.reg_modulus;
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "envelope parameter must be positive, got {eta}"
        )));
    }
    if rho > lambda && eta >= 1.0 / (rho - lambda) {
        return Err(Error::StepCondition(format!(
            "envelope parameter {eta} must stay below 1/(rho - lambda) = {}",
            1.0 / (rho - lambda)
        )));
    }
    let cap = params.envelope_alpha_cap();
    if alpha0 > cap * STEP_CAP_SLACK {
        return Err(Error::StepCondition(format!(
            "base step {alpha0} exceeds the cap (1 - 1/theta)/(L + 1/eta) = {cap}"
        )));
    }
    if data.env_grad_sq.is_empty() {
        return Err(Error::InvalidArgument(
            "stationarity certificate needs a series of squared envelope-gradient norms".into(),
        ));
    }
    let env_start = reference.env_start.ok_or_else(|| {
        Error::InvalidArgument("stationarity certificate needs the starting envelope value".into())
    })?;
    let psi_lower = reference.psi_lower.unwrap_or(0.0);

    let k = data
        .env_grad_sq
        .iter()
        .map(|&(idx, _)| idx)
        .max()
        .unwrap()
        .max(1);
    let measured = data
        .env_grad_sq
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);

    let kf = k as f64;
    let shrink = 1.0 - eta * (rho - lambda).max(0.0);
    let denom = (kf + 1.0).sqrt() - 1.0;
    let bound = (env_start - psi_lower) / (alpha0 * shrink * denom)
        + params.noise_bound * params.theta * alpha0 * (1.0 + kf.ln())
            / (2.0 * eta * shrink * denom);
    Ok(RateCheckOutcome {
        bound,
        measured,
        holds: measured <= bound * BOUND_SLACK,
    })
}

/// Estimate the gradient-noise level of mini-batch sampling without
/// replacement: the largest, over the supplied iterates, of
///
/// `((N − B)/(B (N − 1))) · (1/N) Σ_i ‖∇f_i(x) − ∇f(x)‖²`.
///
/// Returns 0 for full batches or single-sample datasets.
pub fn estimate_beta(
    objective: &dyn StochasticObjective,
    iterates: &[ParamVector],
    batch_size: usize,
) -> f64 {
    let n = objective.dataset_size();
    assert!(batch_size >= 1 && batch_size <= n, "batch size out of range");
    if n <= 1 || batch_size == n {
        return 0.0;
    }
    let correction = (n - batch_size) as f64 / (batch_size as f64 * (n - 1) as f64);
    let mut worst: f64 = 0.0;
    for x in iterates {
        let full = objective.full_gradient(x);
        let mut variance = 0.0;
        for i in 0..n {
            let gi = objective.gradient(x, &Batch::single(i));
            variance += gi.dist_sq(&full);
        }
        variance /= n as f64;
        worst = worst.max(correction * variance);
    }
    worst
}

/// Estimate the full-gradient Lipschitz constant near `center`: the largest
/// secant ratio `‖∇f(x) − ∇f(y)‖ / ‖x − y‖` over random pairs in the ball
/// of the given radius. Every pair is also re-tried at 1/10 and 1/100 of
/// its separation to pick up local curvature. This lower-bounds the true
/// constant, so treat the result as an order-of-magnitude calibration, not
/// a certificate.
pub fn estimate_smoothness(
    objective: &dyn StochasticObjective,
    center: &ParamVector,
    radius: f64,
    pairs: usize,
    rng: &mut RngStream,
) -> f64 {
    assert!(
        radius > 0.0 && radius.is_finite(),
        "sampling radius must be positive and finite, got {radius}"
    );
    assert!(pairs >= 1, "need at least one sample pair");
    let layout = center.layout().clone();
    let n = center.len();
    let random_point = |rng: &mut RngStream| {
        let v = ParamVector::new(layout.clone(), rng.normal_vec(n))
            .expect("layout length matches by construction");
        let norm = v.norm();
        let dir = if norm > 0.0 { v.scaled(1.0 / norm) } else { v };
        center.combined(radius * rng.uniform01(), &dir)
    };
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x = random_point(rng);
        let y = random_point(rng);
        let diff = y.combined(-1.0, &x);
        for shrink in [1.0, 0.1, 0.01] {
            // Contract y toward x to probe the same direction at finer scales.
            let yk = x.combined(shrink, &diff);
            let sep = yk.dist_sq(&x).sqrt();
            if sep == 0.0 {
                continue;
            }
            let gx = objective.full_gradient(&x);
            let gy = objective.full_gradient(&yk);
            worst = worst.max(gx.dist_sq(&gy).sqrt() / sep);
        }
    }
    worst
}

/// Least-squares slope of `ln y` against `ln x` over positive points;
/// summarizes the decay order of a measured series.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let filtered: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    assert!(
        filtered.len() >= 2,
        "slope needs at least two positive points"
    );
    let n = filtered.len() as f64;
    let mean_x = filtered.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = filtered.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in &filtered {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    assert!(den > 0.0, "slope needs at least two distinct abscissae");
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParamVector;

    fn flat(v: Vec<f64>) -> ParamVector {
        ParamVector::from_flat(v)
    }

    fn base_params() -> RateCheckParams {
        RateCheckParams {
            smoothness: 4.0,
            strong_convexity: 1.0,
            reg_modulus: 0.5,
            noise_bound: 0.1,
            theta: 2.0,
            weak_convexity: 0.0,
            envelope_eta: 0.0,
        }
    }

    #[test]
    fn contraction_bound_matches_hand_arithmetic() {
        let params = base_params();
        let alpha = 0.125; // the cap (1 - 1/2)/4
        let data = RateRunData {
            trajectories: vec![vec![flat(vec![1.0, 0.0]), flat(vec![0.5, 0.0])]],
            env_grad_sq: vec![],
        };
        let reference = RateReference {
            x_star: Some(flat(vec![0.0, 0.0])),
            ..Default::default()
        };
        let outcome = evaluate_rate_bound(
            RateKind::ConstantContraction,
            &params,
            &Schedule::constant(alpha),
            &data,
            &reference,
            &|_| 0.0,
        )
        .unwrap();
        // K = 1, curvature = 1 + 2*0.5 = 2:
        // bound = 1/(1 + 0.125*2) + 2*0.1*0.125/2 = 0.8 + 0.0125
        assert!((outcome.bound - 0.8125).abs() < 1e-12);
        assert!((outcome.measured - 0.25).abs() < 1e-12);
        assert!(outcome.holds);
    }

    #[test]
    fn contraction_rejects_an_oversized_step() {
        let params = base_params();
        let data = RateRunData {
            trajectories: vec![vec![flat(vec![1.0]), flat(vec![0.5])]],
            env_grad_sq: vec![],
        };
        let reference = RateReference {
            x_star: Some(flat(vec![0.0])),
            ..Default::default()
        };
        let err = evaluate_rate_bound(
            RateKind::ConstantContraction,
            &params,
            &Schedule::constant(0.2),
            &data,
            &reference,
            &|_| 0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepCondition(_)), "{err:?}");
    }

    #[test]
    fn contraction_rejects_the_wrong_schedule_shape() {
        let params = base_params();
        let data = RateRunData {
            trajectories: vec![vec![flat(vec![1.0]), flat(vec![0.5])]],
            env_grad_sq: vec![],
        };
        let reference = RateReference {
            x_star: Some(flat(vec![0.0])),
            ..Default::default()
        };
        let err = evaluate_rate_bound(
            RateKind::ConstantContraction,
            &params,
            &Schedule::sqrt_iter(0.1),
            &data,
            &reference,
            &|_| 0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepCondition(_)));
    }

    #[test]
    fn sqrt_average_uses_step_weights() {
        // Two iterates after the start: weights 1 and 1/sqrt(2).
        let params = RateCheckParams {
            reg_modulus: 0.0,
            strong_convexity: 0.0,
            ..base_params()
        };
        let alpha0 = params.alpha_cap();
        let t = vec![
            flat(vec![0.0]),
            flat(vec![1.0]),
            flat(vec![2.0]),
        ];
        let data = RateRunData {
            trajectories: vec![t],
            env_grad_sq: vec![],
        };
        let reference = RateReference {
            x_star: Some(flat(vec![0.0])),
            psi_star: Some(0.0),
            ..Default::default()
        };
        let w2 = 1.0 / 2.0_f64.sqrt();
        let expected_avg = (1.0 + 2.0 * w2) / (1.0 + w2);
        let outcome = evaluate_rate_bound(
            RateKind::SqrtAverage,
            &params,
            &Schedule::sqrt_iter(alpha0),
            &data,
            &reference,
            &|x| x.data()[0],
        )
        .unwrap();
        assert!((outcome.measured - expected_avg).abs() < 1e-12);
    }

    #[test]
    fn stationarity_takes_the_running_minimum() {
        let params = RateCheckParams {
            weak_convexity: 1.0,
            reg_modulus: 0.0,
            strong_convexity: 0.0,
            envelope_eta: 0.5,
            ..base_params()
        };
        let alpha0 = params.envelope_alpha_cap();
        let data = RateRunData {
            trajectories: vec![],
            env_grad_sq: vec![(1, 4.0), (4, 1.0), (16, 2.0)],
        };
        let reference = RateReference {
            env_start: Some(3.0),
            psi_lower: Some(0.0),
            ..Default::default()
        };
        let outcome = evaluate_rate_bound(
            RateKind::EnvelopeStationarity,
            &params,
            &Schedule::sqrt_iter(alpha0),
            &data,
            &reference,
            &|_| 0.0,
        )
        .unwrap();
        assert!((outcome.measured - 1.0).abs() < 1e-15);
        // shrink = 1 - 0.5*1 = 0.5; K = 16; denom = sqrt(17) - 1
        let denom = 17.0_f64.sqrt() - 1.0;
        let expected = 3.0 / (alpha0 * 0.5 * denom)
            + 0.1 * 2.0 * alpha0 * (1.0 + 16.0_f64.ln()) / (2.0 * 0.5 * 0.5 * denom);
        assert!((outcome.bound - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn stationarity_rejects_an_envelope_outside_the_convexifying_window() {
        let params = RateCheckParams {
            weak_convexity: 2.0,
            reg_modulus: 0.0,
            strong_convexity: 0.0,
            envelope_eta: 0.6, // 1/(rho - lambda) = 0.5
            ..base_params()
        };
        let data = RateRunData {
            trajectories: vec![],
            env_grad_sq: vec![(1, 1.0)],
        };
        let reference = RateReference {
            env_start: Some(1.0),
            ..Default::default()
        };
        let err = evaluate_rate_bound(
            RateKind::EnvelopeStationarity,
            &params,
            &Schedule::sqrt_iter(1e-3),
            &data,
            &reference,
            &|_| 0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepCondition(_)));
    }

    #[test]
    fn smoothness_estimate_brackets_the_quadratic_curvature() {
        use crate::problems::RidgeProblem;
        use crate::rng::RngStream;

        let (problem, _) = RidgeProblem::generate(20, 5, 11);
        let a = problem.design();
        let hessian = (a.transpose() * a) / a.nrows() as f64;
        let l_true = nalgebra::SymmetricEigen::new(hessian)
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v));

        let center = ParamVector::from_flat(vec![0.0; 5]);
        let mut rng = RngStream::substream(7, 42);
        let estimate = estimate_smoothness(&problem, &center, 2.0, 40, &mut rng);
        // Secant ratios of a quadratic never exceed the top eigenvalue and,
        // with this many directions, land within a factor of two of it.
        assert!(estimate <= l_true * (1.0 + 1e-9), "{estimate} vs {l_true}");
        assert!(estimate >= 0.5 * l_true, "{estimate} vs {l_true}");
    }

    #[test]
    fn log_log_slope_recovers_an_exact_power_law() {
        let points: Vec<(f64, f64)> = (1..=20)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(-0.5)))
            .collect();
        let slope = log_log_slope(&points);
        assert!((slope + 0.5).abs() < 1e-12, "slope {slope}");
    }

    #[test]
    fn mismatched_trajectory_lengths_are_rejected() {
        let params = base_params();
        let data = RateRunData {
            trajectories: vec![
                vec![flat(vec![0.0]), flat(vec![1.0])],
                vec![flat(vec![0.0]), flat(vec![1.0]), flat(vec![2.0])],
            ],
            env_grad_sq: vec![],
        };
        let reference = RateReference {
            x_star: Some(flat(vec![0.0])),
            ..Default::default()
        };
        let err = evaluate_rate_bound(
            RateKind::ConstantContraction,
            &params,
            &Schedule::constant(0.01),
            &data,
            &reference,
            &|_| 0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
