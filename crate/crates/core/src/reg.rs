//! Regularizers: convex penalty terms accessed through their proximal operator.

use crate::param::ParamVector;

/// A proper closed convex penalty `phi` with a computable proximal operator.
///
/// `prox(x, alpha)` returns `argmin_y phi(y) + ‖y − x‖² / (2 alpha)`.
pub trait Regularizer {
    fn value(&self, x: &ParamVector) -> f64;

    fn prox(&self, x: &ParamVector, alpha: f64) -> ParamVector;

    /// Strong-convexity modulus of `phi` (0 for merely convex penalties).
    fn strong_convexity(&self) -> f64;

    /// Classical gradient where `phi` is differentiable; `None` otherwise.
    ///
    /// Methods without native regularizer support fold a differentiable
    /// penalty into the loss and need this.
    fn grad(&self, _x: &ParamVector) -> Option<ParamVector> {
        None
    }

    /// `Some(lambda)` when `phi` is exactly `(lambda/2)‖·‖²`; lets callers
    /// route to closed-form updates that only exist for that penalty.
    fn l2_modulus(&self) -> Option<f64> {
        None
    }
}

/// Squared-norm penalty `(lambda / 2) ‖x‖²`.
#[derive(Clone, Copy, Debug)]
pub struct L2Reg {
    pub lambda: f64,
}

impl L2Reg {
    pub fn new(lambda: f64) -> L2Reg {
        assert!(
            lambda >= 0.0 && lambda.is_finite(),
            "l2 modulus must be finite and nonnegative, got {lambda}"
        );
        L2Reg { lambda }
    }
}

impl Regularizer for L2Reg {
    fn value(&self, x: &ParamVector) -> f64 {
        0.5 * self.lambda * x.norm_sq()
    }

    fn prox(&self, x: &ParamVector, alpha: f64) -> ParamVector {
        x.scaled(1.0 / (1.0 + alpha * self.lambda))
    }

    fn strong_convexity(&self) -> f64 {
        self.lambda
    }

    fn grad(&self, x: &ParamVector) -> Option<ParamVector> {
        Some(x.scaled(self.lambda))
    }

    fn l2_modulus(&self) -> Option<f64> {
        Some(self.lambda)
    }
}

/// The zero penalty; its prox is the identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroReg;

impl Regularizer for ZeroReg {
    fn value(&self, _x: &ParamVector) -> f64 {
        0.0
    }

    fn prox(&self, x: &ParamVector, _alpha: f64) -> ParamVector {
        x.clone()
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn grad(&self, x: &ParamVector) -> Option<ParamVector> {
        Some(x.scaled(0.0))
    }

    fn l2_modulus(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Indicator of the box `[lo, hi]^n`; its prox is coordinatewise clamping.
#[derive(Clone, Copy, Debug)]
pub struct BoxReg {
    pub lo: f64,
    pub hi: f64,
}

impl BoxReg {
    pub fn new(lo: f64, hi: f64) -> BoxReg {
        assert!(lo <= hi, "box bounds out of order: [{lo}, {hi}]");
        BoxReg { lo, hi }
    }
}

impl Regularizer for BoxReg {
    fn value(&self, x: &ParamVector) -> f64 {
        let inside = x.data().iter().all(|&v| v >= self.lo && v <= self.hi);
        if inside {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, x: &ParamVector, _alpha: f64) -> ParamVector {
        let mut out = x.clone();
        for v in out.data_mut() {
            *v = v.clamp(self.lo, self.hi);
        }
        out
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_prox_shrinks_toward_origin() {
        let x = ParamVector::from_flat(vec![2.0, -4.0]);
        let reg = L2Reg::new(1.0);
        let y = reg.prox(&x, 1.0);
        assert_eq!(y.data(), &[1.0, -2.0]);
        assert_eq!(reg.value(&x), 10.0);
    }

    #[test]
    fn zero_reg_prox_is_identity() {
        let x = ParamVector::from_flat(vec![1.5, -0.25]);
        let y = ZeroReg.prox(&x, 3.0);
        assert_eq!(y.data(), x.data());
        assert_eq!(ZeroReg.value(&x), 0.0);
    }

    #[test]
    fn box_prox_clamps_and_value_flags_outside_points() {
        let reg = BoxReg::new(-1.0, 1.0);
        let x = ParamVector::from_flat(vec![2.0, -0.5, -7.0]);
        let y = reg.prox(&x, 0.1);
        assert_eq!(y.data(), &[1.0, -0.5, -1.0]);
        assert_eq!(reg.value(&x), f64::INFINITY);
        assert_eq!(reg.value(&y), 0.0);
    }
}
