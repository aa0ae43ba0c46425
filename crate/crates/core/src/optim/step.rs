//! Single-iteration update rules.
//!
//! All rules consume the batch loss `fval`, a lower bound `c_lower` on the
//! batch loss, the batch gradient `g`, and a step-size cap `alpha`. The
//! Polyak-type rules choose their effective step from the gap
//! `fval − c_lower`; the cap keeps them bounded away from wild steps when
//! the gap is large relative to the gradient.

use crate::error::Result;
use crate::param::ParamVector;
use crate::prox::{
    prox_l2, solve_truncated_prox_detailed, TruncatedProxProblem, DEFAULT_PROX_TOL,
};
use crate::reg::Regularizer;

/// Per-iteration log entry shared by every update rule.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Global iteration counter (filled in by the run loop).
    pub iter: usize,
    /// Step-size cap `alpha_k` in force at this iteration.
    pub alpha: f64,
    /// Uncapped Polyak-type ratio, where the rule defines one.
    pub zeta: Option<f64>,
    /// Step actually taken along the gradient direction
    /// (`gamma_k`, `tau_k`, or plain `alpha_k`).
    pub applied_step: f64,
    /// Batch loss consumed by the rule.
    pub loss_batch: f64,
    /// Squared norm of the gradient consumed by the rule.
    pub grad_norm_sq: f64,
    /// Norm of the post-step iterate.
    pub param_norm: f64,
    /// Set when `fval < c_lower`, i.e. the supplied bound was not a lower
    /// bound on this batch; the rule clamps the gap to zero and proceeds.
    pub lower_bound_violated: bool,
}

impl StepRecord {
    fn new(alpha: f64, loss_batch: f64, grad_norm_sq: f64) -> StepRecord {
        StepRecord {
            iter: 0,
            alpha,
            zeta: None,
            applied_step: 0.0,
            loss_batch,
            grad_norm_sq,
            param_norm: 0.0,
            lower_bound_violated: false,
        }
    }
}

/// Plain gradient step `x − alpha·g`.
pub fn sgd_step(x: &ParamVector, g: &ParamVector, alpha: f64) -> ParamVector {
    debug_assert!(alpha > 0.0);
    x.combined(-alpha, g)
}

/// Proximal gradient step `prox_{alpha·phi}(x − alpha·g)`.
pub fn prox_sgd_step(
    x: &ParamVector,
    g: &ParamVector,
    alpha: f64,
    reg: &dyn Regularizer,
) -> ParamVector {
    debug_assert!(alpha > 0.0);
    reg.prox(&x.combined(-alpha, g), alpha)
}

/// Capped Polyak step:
///
/// `gamma = min{ alpha, (fval − c_lower) / (c_scale·‖g‖²) }`, `x⁺ = x − gamma·g`.
///
/// `c_scale = 1` is the plain rule; larger values damp the Polyak ratio.
/// A zero gradient leaves `x` unchanged.
pub fn sps_step(
    x: &ParamVector,
    fval: f64,
    c_lower: f64,
    g: &ParamVector,
    alpha: f64,
    c_scale: f64,
) -> (ParamVector, StepRecord) {
    assert!(alpha > 0.0, "step cap must be positive, got {alpha}");
    assert!(c_scale > 0.0, "c_scale must be positive, got {c_scale}");
    let gsq = g.norm_sq();
    let mut record = StepRecord::new(alpha, fval, gsq);
    record.lower_bound_violated = fval < c_lower;
    let next = if gsq == 0.0 {
        x.clone()
    } else {
        let zeta = (fval - c_lower).max(0.0) / (c_scale * gsq);
        let gamma = alpha.min(zeta);
        record.zeta = Some(zeta);
        record.applied_step = gamma;
        x.combined(-gamma, g)
    };
    record.param_norm = next.norm();
    (next, record)
}

/// Polyak step with an exactly-handled squared-norm penalty
/// `(lambda/2)‖·‖²`:
///
/// `tau = min{ alpha, ((1+alpha·lambda)(fval − c_lower) − alpha·lambda⟨g, x⟩)₊ / ‖g‖² }`
///
/// followed by `x⁺ = (x − tau·g) / (1 + alpha·lambda)`. The update is, by
/// construction, the prox of the intermediate point: the returned iterate
/// equals `prox_l2(x − tau·g, alpha, lambda)` bit for bit. A zero gradient
/// shrinks `x` by the prox factor alone.
pub fn proxsps_l2_step(
    x: &ParamVector,
    fval: f64,
    c_lower: f64,
    g: &ParamVector,
    alpha: f64,
    lambda: f64,
) -> (ParamVector, StepRecord) {
    assert!(alpha > 0.0, "step cap must be positive, got {alpha}");
    assert!(lambda >= 0.0, "l2 modulus must be nonnegative, got {lambda}");
    let gsq = g.norm_sq();
    let mut record = StepRecord::new(alpha, fval, gsq);
    record.lower_bound_violated = fval < c_lower;
    let next = if gsq == 0.0 {
        prox_l2(x, alpha, lambda).expect("validated arguments")
    } else {
        let scale = 1.0 + alpha * lambda;
        let zeta = (scale * (fval - c_lower) - alpha * lambda * g.dot(x)).max(0.0) / gsq;
        let tau = alpha.min(zeta);
        record.zeta = Some(zeta);
        record.applied_step = tau;
        prox_l2(&x.combined(-tau, g), alpha, lambda).expect("validated arguments")
    };
    record.param_norm = next.norm();
    (next, record)
}

/// Polyak step with an arbitrary regularizer, solved through the truncated
/// proximal subproblem
///
/// `x⁺ = argmin_y max{fval + ⟨g, y − x⟩, c_lower} + phi(y) + ‖y − x‖²/(2 alpha)`.
///
/// For the squared-norm penalty this agrees with [`proxsps_l2_step`]; the
/// closed form there skips the bisection this route may need.
pub fn proxsps_general_step(
    x: &ParamVector,
    fval: f64,
    c_lower: f64,
    g: &ParamVector,
    alpha: f64,
    reg: &dyn Regularizer,
) -> Result<(ParamVector, StepRecord)> {
    let gsq = g.norm_sq();
    let mut record = StepRecord::new(alpha, fval, gsq);
    record.lower_bound_violated = fval < c_lower;
    // Dropping the constant c_lower from the hinge does not move the argmin:
    // max{l(y), C} = C + (l(y) − C)₊.
    let problem = TruncatedProxProblem {
        c: fval - c_lower - g.dot(x),
        a: g.clone(),
        x0: x.clone(),
        beta: alpha,
        reg,
    };
    let (next, hinge_coeff) = solve_truncated_prox_detailed(&problem, DEFAULT_PROX_TOL)?;
    if gsq > 0.0 {
        record.applied_step = alpha * hinge_coeff;
    }
    record.param_norm = next.norm();
    Ok((next, record))
}

/// State threaded through [`decsps_step`] calls.
#[derive(Clone, Copy, Debug)]
pub struct DecSpsState {
    /// Normalization used at the previous iteration (`c_{k−1}`).
    pub c_prev: f64,
    /// Previous effective step (`gamma_{k−1}`).
    pub gamma_prev: f64,
    /// Iteration counter `k`.
    pub k: usize,
}

impl DecSpsState {
    /// `c0` seeds the `c_{k−1}` slot for the very first step and
    /// `gamma_init` plays the role of the previous step there.
    pub fn new(c0: f64, gamma_init: f64) -> DecSpsState {
        assert!(c0 > 0.0, "normalization must be positive, got {c0}");
        assert!(gamma_init > 0.0, "initial step must be positive, got {gamma_init}");
        DecSpsState {
            c_prev: c0,
            gamma_prev: gamma_init,
            k: 0,
        }
    }
}

/// Default normalization sequence `c_k = sqrt(k + 1)`.
pub fn default_c_schedule(k: usize) -> f64 {
    ((k + 1) as f64).sqrt()
}

/// Decreasing Polyak step:
///
/// `gamma_k = (1/c_k) · min{ (fval − c_lower)/‖g‖², c_{k−1}·gamma_{k−1} }`,
/// `x⁺ = x − gamma_k·g`.
///
/// The running product `c_k·gamma_k` never increases, which forces
/// `gamma_k → 0` at the `1/c_k` rate regardless of the Polyak ratios seen.
/// A zero gradient leaves `x` unchanged and only advances the cap.
pub fn decsps_step(
    x: &ParamVector,
    fval: f64,
    c_lower: f64,
    g: &ParamVector,
    state: &DecSpsState,
    c_schedule: &dyn Fn(usize) -> f64,
) -> (ParamVector, DecSpsState, StepRecord) {
    let ck = c_schedule(state.k);
    assert!(
        ck > 0.0 && ck >= state.c_prev,
        "normalization sequence must be positive and nondecreasing ({} after {})",
        ck,
        state.c_prev
    );
    let gsq = g.norm_sq();
    let cap = state.c_prev * state.gamma_prev;
    // The rule carries its own cap: gamma_k can never exceed cap / c_k.
    let mut record = StepRecord::new(cap / ck, fval, gsq);
    record.lower_bound_violated = fval < c_lower;
    if gsq == 0.0 {
        // No information this iteration: keep the cap state, bump the counter.
        record.param_norm = x.norm();
        let new_state = DecSpsState {
            k: state.k + 1,
            ..*state
        };
        return (x.clone(), new_state, record);
    }
    let ratio = (fval - c_lower).max(0.0) / gsq;
    record.zeta = Some(ratio);
    let gamma = ratio.min(cap) / ck;
    record.applied_step = gamma;
    let next = x.combined(-gamma, g);
    record.param_norm = next.norm();
    let new_state = DecSpsState {
        c_prev: ck,
        gamma_prev: gamma,
        k: state.k + 1,
    };
    (next, new_state, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reg::{BoxReg, L2Reg, ZeroReg};

    fn scalar(v: f64) -> ParamVector {
        ParamVector::from_flat(vec![v])
    }

    // Shared scalar instance: f(x) = (x − 2)²/2 evaluated at x = 0 gives
    // fval = 2, g = −2.
    const FVAL: f64 = 2.0;
    const GRAD: f64 = -2.0;

    #[test]
    fn sgd_step_moves_against_the_gradient() {
        let next = sgd_step(&scalar(0.0), &scalar(GRAD), 0.25);
        assert_eq!(next.data(), &[0.5]);
    }

    #[test]
    fn prox_sgd_step_composes_gradient_and_prox() {
        let reg = L2Reg::new(1.0);
        // x − alpha·g = 1, then shrink by 1/(1 + 1·1).
        let next = prox_sgd_step(&scalar(0.0), &scalar(GRAD), 0.5, &reg);
        assert_eq!(next.data(), &[2.0 / 3.0]);
    }

    #[test]
    fn sps_step_takes_the_polyak_ratio_when_it_undercuts_the_cap() {
        // ratio = 2 / 4 = 1/2 < alpha = 1, so x moves from 0 to 1.
        let (next, rec) = sps_step(&scalar(0.0), FVAL, 0.0, &scalar(GRAD), 1.0, 1.0);
        assert_eq!(next.data(), &[1.0]);
        assert_eq!(rec.applied_step, 0.5);
        assert_eq!(rec.zeta, Some(0.5));
        assert!(!rec.lower_bound_violated);
    }

    #[test]
    fn sps_step_caps_at_alpha() {
        let (next, rec) = sps_step(&scalar(0.0), FVAL, 0.0, &scalar(GRAD), 0.1, 1.0);
        assert_eq!(rec.applied_step, 0.1);
        assert_eq!(next.data(), &[0.2]);
    }

    #[test]
    fn sps_step_scales_the_denominator() {
        let (_, rec) = sps_step(&scalar(0.0), FVAL, 0.0, &scalar(GRAD), 10.0, 2.0);
        assert_eq!(rec.zeta, Some(0.25));
    }

    #[test]
    fn sps_step_with_zero_gradient_is_a_no_op() {
        let (next, rec) = sps_step(&scalar(3.0), 1.0, 0.0, &scalar(0.0), 1.0, 1.0);
        assert_eq!(next.data(), &[3.0]);
        assert_eq!(rec.applied_step, 0.0);
        assert_eq!(rec.zeta, None);
    }

    #[test]
    fn sps_step_flags_a_violated_lower_bound_and_stays_put() {
        let (next, rec) = sps_step(&scalar(3.0), 1.0, 5.0, &scalar(1.0), 1.0, 1.0);
        assert!(rec.lower_bound_violated);
        assert_eq!(rec.applied_step, 0.0);
        assert_eq!(next.data(), &[3.0]);
    }

    #[test]
    fn proxsps_l2_step_matches_the_hand_computed_scalar_case() {
        // tau = min{1, ((1+1)·2 − 1·⟨−2, 0⟩)/4} = 1;
        // x⁺ = (0 − 1·(−2)) / (1 + 1) = 1.
        let (next, rec) = proxsps_l2_step(&scalar(0.0), FVAL, 0.0, &scalar(GRAD), 1.0, 1.0);
        assert_eq!(rec.applied_step, 1.0);
        assert_eq!(next.data(), &[1.0]);
    }

    #[test]
    fn proxsps_l2_step_without_penalty_is_the_plain_polyak_step() {
        let (a, ra) = proxsps_l2_step(&scalar(0.0), FVAL, 0.0, &scalar(GRAD), 1.0, 0.0);
        let (b, rb) = sps_step(&scalar(0.0), FVAL, 0.0, &scalar(GRAD), 1.0, 1.0);
        assert_eq!(a.data(), b.data());
        assert_eq!(ra.applied_step, rb.applied_step);
    }

    #[test]
    fn proxsps_l2_step_with_zero_gradient_shrinks_by_the_prox_factor() {
        let (next, rec) = proxsps_l2_step(&scalar(4.0), 1.0, 0.0, &scalar(0.0), 1.0, 1.0);
        assert_eq!(next.data(), &[2.0]);
        assert_eq!(rec.applied_step, 0.0);
    }

    #[test]
    fn proxsps_l2_interpolation_case_only_shrinks() {
        // fval equal to the bound at x with ⟨g, x⟩ = 0 gives tau = 0.
        let (next, _) = proxsps_l2_step(&scalar(0.0), 0.0, 0.0, &scalar(1.0), 1.0, 1.0);
        assert_eq!(next.data(), &[0.0]);
    }

    #[test]
    fn general_step_reproduces_the_l2_closed_form() {
        let reg = L2Reg::new(1.0);
        let x = ParamVector::from_flat(vec![0.4, -1.2]);
        let g = ParamVector::from_flat(vec![2.0, 0.5]);
        let (closed, rc) = proxsps_l2_step(&x, 3.0, 0.0, &g, 0.8, 1.0);
        let (general, rg) = proxsps_general_step(&x, 3.0, 0.0, &g, 0.8, &reg).unwrap();
        assert!(
            closed.max_abs_diff(&general) < 1e-8,
            "closed {:?} vs general {:?}",
            closed.data(),
            general.data()
        );
        assert!((rc.applied_step - rg.applied_step).abs() < 1e-8);
    }

    #[test]
    fn general_step_with_zero_penalty_matches_sps() {
        let x = ParamVector::from_flat(vec![1.0, -0.5]);
        let g = ParamVector::from_flat(vec![0.3, 0.7]);
        let (plain, _) = sps_step(&x, 1.5, 0.0, &g, 2.0, 1.0);
        let (general, _) = proxsps_general_step(&x, 1.5, 0.0, &g, 2.0, &ZeroReg).unwrap();
        assert!(plain.max_abs_diff(&general) < 1e-10);
    }

    #[test]
    fn general_step_respects_a_box() {
        let reg = BoxReg::new(0.0, 1.0);
        let x = ParamVector::from_flat(vec![0.9]);
        let g = ParamVector::from_flat(vec![-4.0]);
        let (next, _) = proxsps_general_step(&x, 5.0, 0.0, &g, 1.0, &reg).unwrap();
        assert_eq!(next.data(), &[1.0]);
    }

    #[test]
    fn decsps_first_step_divides_the_capped_ratio_by_c0() {
        let state = DecSpsState::new(default_c_schedule(0), 10.0);
        // ratio = 2/4 = 0.5, cap = 1·10; gamma = 0.5/1 = 0.5.
        let (next, new_state, rec) =
            decsps_step(&scalar(0.0), FVAL, 0.0, &scalar(GRAD), &state, &default_c_schedule);
        assert_eq!(rec.applied_step, 0.5);
        assert_eq!(next.data(), &[1.0]);
        assert_eq!(new_state.k, 1);
        assert_eq!(new_state.gamma_prev, 0.5);
    }

    #[test]
    fn decsps_cap_sequence_never_increases() {
        let mut x = scalar(0.0);
        let mut state = DecSpsState::new(default_c_schedule(0), 1.0);
        let mut prev_cap = state.c_prev * state.gamma_prev;
        for _ in 0..50 {
            let fv = 0.5 * (x.data()[0] - 2.0).powi(2);
            let g = scalar(x.data()[0] - 2.0);
            let (nx, ns, _) = decsps_step(&x, fv, 0.0, &g, &state, &default_c_schedule);
            let cap = ns.c_prev * ns.gamma_prev;
            assert!(
                cap <= prev_cap * (1.0 + 1e-12),
                "cap grew from {prev_cap} to {cap}"
            );
            prev_cap = cap;
            x = nx;
            state = ns;
        }
    }

    #[test]
    fn decsps_interpolation_point_produces_a_zero_step() {
        let state = DecSpsState::new(1.0, 1.0);
        let (next, _, rec) =
            decsps_step(&scalar(2.0), 0.0, 0.0, &scalar(1.0), &state, &default_c_schedule);
        assert_eq!(rec.applied_step, 0.0);
        assert_eq!(next.data(), &[2.0]);
    }

    #[test]
    fn decsps_zero_gradient_leaves_x_and_advances_the_counter() {
        let state = DecSpsState::new(1.0, 5.0);
        let (next, ns, rec) =
            decsps_step(&scalar(1.0), 1.0, 0.0, &scalar(0.0), &state, &default_c_schedule);
        assert_eq!(next.data(), &[1.0]);
        assert_eq!(ns.k, 1);
        assert_eq!(rec.applied_step, 0.0);
        assert_eq!(rec.zeta, None);
    }
}
