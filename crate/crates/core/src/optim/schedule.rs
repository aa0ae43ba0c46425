//! Step-size cap schedules `alpha_k`.

/// How the step-size cap evolves over iterations `k = 0, 1, 2, …` and epochs
/// `j = 1, 2, …`.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// `alpha_k = alpha0`.
    Constant { alpha0: f64 },
    /// `alpha_k = alpha0 / sqrt(j)` with the epoch index `j` starting at 1.
    SqrtEpoch { alpha0: f64 },
    /// `alpha_k = alpha0 / sqrt(k + 1)`.
    SqrtIter { alpha0: f64 },
    /// `alpha_k = alpha0 / sqrt(K)` for a horizon of `K` total iterations.
    SqrtTotal { alpha0: f64, total_iters: usize },
    /// `alpha_k = 1 / (lambda (k + k0))`; pairs with a `lambda`-strongly
    /// convex composite term.
    StrongDecay { lambda: f64, k0: f64 },
}

impl Schedule {
    pub fn constant(alpha0: f64) -> Schedule {
        assert!(alpha0 > 0.0, "alpha0 must be positive, got {alpha0}");
        Schedule::Constant { alpha0 }
    }

    pub fn sqrt_epoch(alpha0: f64) -> Schedule {
        assert!(alpha0 > 0.0, "alpha0 must be positive, got {alpha0}");
        Schedule::SqrtEpoch { alpha0 }
    }

    pub fn sqrt_iter(alpha0: f64) -> Schedule {
        assert!(alpha0 > 0.0, "alpha0 must be positive, got {alpha0}");
        Schedule::SqrtIter { alpha0 }
    }

    pub fn sqrt_total(alpha0: f64, total_iters: usize) -> Schedule {
        assert!(alpha0 > 0.0, "alpha0 must be positive, got {alpha0}");
        assert!(total_iters >= 1, "horizon must be at least 1 iteration");
        Schedule::SqrtTotal {
            alpha0,
            total_iters,
        }
    }

    pub fn strong_decay(lambda: f64, k0: f64) -> Schedule {
        assert!(lambda > 0.0, "lambda must be positive, got {lambda}");
        assert!(k0 >= 1.0, "k0 must be at least 1, got {k0}");
        Schedule::StrongDecay { lambda, k0 }
    }

    /// Cap for iteration `k` (0-based) inside epoch `epoch` (1-based).
    pub fn alpha(&self, k: usize, epoch: usize) -> f64 {
        let a = match self {
            Schedule::Constant { alpha0 } => *alpha0,
            Schedule::SqrtEpoch { alpha0 } => {
                debug_assert!(epoch >= 1, "epoch index is 1-based");
                alpha0 / (epoch.max(1) as f64).sqrt()
            }
            Schedule::SqrtIter { alpha0 } => alpha0 / ((k + 1) as f64).sqrt(),
            Schedule::SqrtTotal {
                alpha0,
                total_iters,
            } => alpha0 / (*total_iters as f64).sqrt(),
            Schedule::StrongDecay { lambda, k0 } => 1.0 / (lambda * (k as f64 + k0)),
        };
        debug_assert!(a > 0.0, "schedule produced a non-positive cap {a}");
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_ignores_counters() {
        let s = Schedule::constant(0.7);
        assert_eq!(s.alpha(0, 1), 0.7);
        assert_eq!(s.alpha(999, 42), 0.7);
    }

    #[test]
    fn sqrt_epoch_halves_at_epoch_four() {
        let s = Schedule::sqrt_epoch(1.0);
        assert_eq!(s.alpha(0, 1), 1.0);
        assert_eq!(s.alpha(10, 4), 0.5);
    }

    #[test]
    fn sqrt_iter_halves_at_k_three() {
        let s = Schedule::sqrt_iter(1.0);
        assert_eq!(s.alpha(0, 1), 1.0);
        assert_eq!(s.alpha(3, 1), 0.5);
    }

    #[test]
    fn sqrt_total_is_constant_in_k() {
        let s = Schedule::sqrt_total(2.0, 100);
        assert_eq!(s.alpha(0, 1), 0.2);
        assert_eq!(s.alpha(99, 7), 0.2);
    }

    #[test]
    fn strong_decay_matches_the_formula() {
        let s = Schedule::strong_decay(0.1, 40.0);
        assert!((s.alpha(0, 1) - 1.0 / 4.0).abs() < 1e-15);
        assert!((s.alpha(60, 3) - 1.0 / 10.0).abs() < 1e-15);
    }

    #[test]
    fn caps_stay_positive_over_long_horizons() {
        let schedules = [
            Schedule::constant(3.0),
            Schedule::sqrt_epoch(3.0),
            Schedule::sqrt_iter(3.0),
            Schedule::sqrt_total(3.0, 1_000_000),
            Schedule::strong_decay(2.0, 1.0),
        ];
        for s in &schedules {
            for k in [0usize, 1, 10, 1_000, 1_000_000] {
                let a = s.alpha(k, 1 + k / 10);
                assert!(a > 0.0 && a.is_finite(), "{s:?} gave {a} at k={k}");
            }
        }
    }
}
