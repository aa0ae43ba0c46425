//! Proximal solvers for truncated linear models.
//!
//! The central subproblem is
//!
//! `min_y (c + ⟨a, y⟩)₊ + phi(y) + ‖y − x0‖² / (2 beta)`
//!
//! where `(t)₊ = max{t, 0}` and `phi` is any [`Regularizer`]. Writing
//! `p(u) = prox_{beta·phi}(x0 − beta·u·a)` for `u ∈ [0, 1]`, the minimizer is
//! always of the form `p(u)`:
//!
//! * if the hinge is strictly active at the full step, i.e.
//!   `c + ⟨a, p(1)⟩ > 0`, the solution is `p(1)`;
//! * if the hinge is strictly inactive at the null step, i.e.
//!   `c + ⟨a, p(0)⟩ < 0`, the solution is `p(0)`;
//! * otherwise the solution sits on the kink: the residual
//!   `r(u) = c + ⟨a, p(u)⟩` is nonincreasing, changes sign on `[0, 1]`,
//!   and its root is located by bisection.
//!
//! The first two conditions cannot hold simultaneously; equalities fall
//! through to the bisection branch.

use crate::error::{Error, Result};
use crate::param::ParamVector;
use crate::reg::Regularizer;

/// Default residual tolerance for the bisection branch.
pub const DEFAULT_PROX_TOL: f64 = 1e-10;

/// Iteration cap for the bisection branch. 100 halvings shrink the bracket
/// to ~1e-30, so running out signals an inconsistent `Regularizer::prox`,
/// not a hard instance.
pub const BISECTION_MAX_ITERS: usize = 100;

/// Scaling prox of the squared-norm penalty: `argmin_y (lambda/2)‖y‖² +
/// ‖y − x‖²/(2 alpha) = x / (1 + alpha·lambda)`.
pub fn prox_l2(x: &ParamVector, alpha: f64, lambda: f64) -> Result<ParamVector> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "prox step must be positive and finite, got {alpha}"
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "l2 modulus must be nonnegative and finite, got {lambda}"
        )));
    }
    Ok(x.scaled(1.0 / (1.0 + alpha * lambda)))
}

/// One instance of the truncated-model subproblem.
pub struct TruncatedProxProblem<'a> {
    /// Constant term of the hinge argument.
    pub c: f64,
    /// Linear term of the hinge argument.
    pub a: ParamVector,
    /// Anchor of the quadratic term.
    pub x0: ParamVector,
    /// Weight of the quadratic term (must be positive).
    pub beta: f64,
    pub reg: &'a dyn Regularizer,
}

impl<'a> TruncatedProxProblem<'a> {
    fn validate(&self) -> Result<()> {
        self.a.check_same_layout(&self.x0)?;
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive and finite, got {}",
                self.beta
            )));
        }
        if !self.c.is_finite() || !self.a.all_finite() || !self.x0.all_finite() {
            return Err(Error::InvalidArgument(
                "subproblem data must be finite".into(),
            ));
        }
        Ok(())
    }

    fn point_at(&self, u: f64) -> ParamVector {
        let shifted = self.x0.combined(-self.beta * u, &self.a);
        self.reg.prox(&shifted, self.beta)
    }

    fn residual_at(&self, point: &ParamVector) -> f64 {
        self.c + self.a.dot(point)
    }
}

/// Solve the truncated-model subproblem; see the module docs for the cases.
pub fn solve_truncated_prox(problem: &TruncatedProxProblem, tol: f64) -> Result<ParamVector> {
    solve_truncated_prox_detailed(problem, tol).map(|(y, _)| y)
}

/// As [`solve_truncated_prox`], additionally reporting the hinge coefficient
/// `u ∈ [0, 1]` of the solution `p(u)`; `beta · u` is the effective step
/// taken along `a`.
pub fn solve_truncated_prox_detailed(
    problem: &TruncatedProxProblem,
    tol: f64,
) -> Result<(ParamVector, f64)> {
    problem.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    // Hinge strictly active at the full step.
    let full = problem.point_at(1.0);
    if problem.residual_at(&full) > 0.0 {
        return Ok((full, 1.0));
    }

    // Hinge strictly inactive at the null step.
    let null = problem.point_at(0.0);
    if problem.residual_at(&null) < 0.0 {
        return Ok((null, 0.0));
    }

    // Root of the nonincreasing residual on [0, 1]: r(0) >= 0 >= r(1) here.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut last_residual = f64::INFINITY;
    for _ in 0..BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let point = problem.point_at(mid);
        let r = problem.residual_at(&point);
        if r.abs() <= tol {
            return Ok((point, mid));
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        last_residual = r;
    }
    Err(Error::BisectionFailed {
        iterations: BISECTION_MAX_ITERS,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reg::{BoxReg, L2Reg, ZeroReg};

    #[test]
    fn prox_l2_scales_by_the_closed_form_factor() {
        let x = ParamVector::from_flat(vec![2.0, -4.0]);
        let y = prox_l2(&x, 1.0, 1.0).unwrap();
        assert_eq!(y.data(), &[1.0, -2.0]);
    }

    #[test]
    fn prox_l2_with_zero_modulus_is_identity() {
        let x = ParamVector::from_flat(vec![0.3, -1.7]);
        let y = prox_l2(&x, 2.5, 0.0).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn prox_l2_fixes_the_origin() {
        let x = ParamVector::from_flat(vec![0.0, 0.0]);
        let y = prox_l2(&x, 3.0, 2.0).unwrap();
        assert_eq!(y.data(), &[0.0, 0.0]);
    }

    #[test]
    fn prox_l2_rejects_nonpositive_step() {
        let x = ParamVector::from_flat(vec![1.0]);
        assert!(prox_l2(&x, 0.0, 1.0).is_err());
        assert!(prox_l2(&x, -1.0, 1.0).is_err());
    }

    #[test]
    fn scalar_instance_lands_on_the_kink() {
        // min (2 − 2y)₊ + y²/2 + y²/2 has its minimum at y = 1 (value 1),
        // exactly where the hinge argument vanishes.
        let reg = L2Reg::new(1.0);
        let problem = TruncatedProxProblem {
            c: 2.0,
            a: ParamVector::from_flat(vec![-2.0]),
            x0: ParamVector::from_flat(vec![0.0]),
            beta: 1.0,
            reg: &reg,
        };
        let (y, u) = solve_truncated_prox_detailed(&problem, 1e-10).unwrap();
        assert!(
            (y.data()[0] - 1.0).abs() < 1e-9,
            "expected the kink at 1, got {}",
            y.data()[0]
        );
        assert!((u - 1.0).abs() < 1e-9, "hinge coefficient was {u}");
    }

    #[test]
    fn zero_linear_term_reduces_to_a_plain_prox() {
        // With a = 0 the hinge contributes a constant; the answer is
        // prox of the anchor regardless of the sign of c.
        for c in [2.0, -2.0, 0.0] {
            let reg = L2Reg::new(0.5);
            let problem = TruncatedProxProblem {
                c,
                a: ParamVector::from_flat(vec![0.0, 0.0]),
                x0: ParamVector::from_flat(vec![3.0, -3.0]),
                beta: 2.0,
                reg: &reg,
            };
            let y = solve_truncated_prox(&problem, 1e-10).unwrap();
            let expected = reg.prox(&problem.x0, problem.beta);
            assert_eq!(y.data(), expected.data(), "c = {c}");
        }
    }

    #[test]
    fn inactive_hinge_returns_the_anchor_prox() {
        // Strongly negative c keeps the hinge off; the quadratic term alone
        // pins the solution to prox(x0).
        let reg = ZeroReg;
        let problem = TruncatedProxProblem {
            c: -100.0,
            a: ParamVector::from_flat(vec![1.0]),
            x0: ParamVector::from_flat(vec![0.5]),
            beta: 1.0,
            reg: &reg,
        };
        let (y, u) = solve_truncated_prox_detailed(&problem, 1e-10).unwrap();
        assert_eq!(y.data(), &[0.5]);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn active_hinge_takes_the_full_step() {
        // Large positive c keeps the hinge on everywhere reachable, so the
        // solution is the full proximal step x0 − beta·a (zero penalty).
        let reg = ZeroReg;
        let problem = TruncatedProxProblem {
            c: 100.0,
            a: ParamVector::from_flat(vec![1.0]),
            x0: ParamVector::from_flat(vec![0.5]),
            beta: 0.25,
            reg: &reg,
        };
        let (y, u) = solve_truncated_prox_detailed(&problem, 1e-10).unwrap();
        assert_eq!(y.data(), &[0.25]);
        assert_eq!(u, 1.0);
    }

    #[test]
    fn box_constrained_instance_stays_inside_the_box() {
        let reg = BoxReg::new(-1.0, 1.0);
        let problem = TruncatedProxProblem {
            c: 5.0,
            a: ParamVector::from_flat(vec![-3.0, 2.0]),
            x0: ParamVector::from_flat(vec![0.9, -0.9]),
            beta: 1.0,
            reg: &reg,
        };
        let y = solve_truncated_prox(&problem, 1e-10).unwrap();
        for &v in y.data() {
            assert!((-1.0..=1.0).contains(&v), "coordinate {v} escaped the box");
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let reg = ZeroReg;
        let bad_beta = TruncatedProxProblem {
            c: 0.0,
            a: ParamVector::from_flat(vec![1.0]),
            x0: ParamVector::from_flat(vec![0.0]),
            beta: 0.0,
            reg: &reg,
        };
        assert!(solve_truncated_prox(&bad_beta, 1e-10).is_err());

        let mismatched = TruncatedProxProblem {
            c: 0.0,
            a: ParamVector::from_flat(vec![1.0]),
            x0: ParamVector::from_flat(vec![0.0, 0.0]),
            beta: 1.0,
            reg: &reg,
        };
        assert!(solve_truncated_prox(&mismatched, 1e-10).is_err());
    }
}
