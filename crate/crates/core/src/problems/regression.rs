//! Linear least squares and logistic regression as finite-sum objectives,
//! plus the interpolation-gap constant for the least-squares family.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::batch::Batch;
use crate::error::{Error, Result};
use crate::objective::StochasticObjective;
use crate::param::ParamVector;
use crate::rng::RngStream;

fn row_dot(a: &DMatrix<f64>, row: usize, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        acc += a[(row, j)] * x[j];
    }
    acc
}

fn gram_eigen_bounds(a: &DMatrix<f64>) -> (f64, f64) {
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // Symmetric PSD up to rounding; clip tiny negative eigenvalues.
    (lo.max(0.0), hi.max(0.0))
}

/// Least-squares problem `f(x; i) = (a_i·x − b_i)² / 2`, averaged over
/// batches.
pub struct RidgeProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl RidgeProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<RidgeProblem> {
        if a.nrows() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "matrix has {} rows but the target has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidArgument("empty design matrix".into()));
        }
        Ok(RidgeProblem { a, b })
    }

    /// Standard-normal design with a planted uniform `[0, 1]` solution and
    /// consistent targets `b = A·x̂`; returns the problem and `x̂`.
    pub fn generate(n_rows: usize, n_cols: usize, seed: u64) -> (RidgeProblem, ParamVector) {
        let mut design_rng = RngStream::substream(seed, 1);
        let mut a = DMatrix::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                a[(i, j)] = design_rng.standard_normal();
            }
        }
        let mut planted_rng = RngStream::substream(seed, 2);
        let planted: Vec<f64> = (0..n_cols).map(|_| planted_rng.uniform01()).collect();
        let b = DVector::from_fn(n_rows, |i, _| row_dot(&a, i, &planted));
        (
            RidgeProblem { a, b },
            ParamVector::from_flat(planted),
        )
    }

    pub fn n_features(&self) -> usize {
        self.a.ncols()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Curvature floor of the average loss: `lambda_min(AᵀA)/N`.
    pub fn strong_convexity_modulus(&self) -> f64 {
        gram_eigen_bounds(&self.a).0 / self.a.nrows() as f64
    }

    /// Largest per-sample smoothness constant `max_i ‖a_i‖²`; every batch
    /// average is smooth with at most this constant.
    pub fn max_row_norm_sq(&self) -> f64 {
        (0..self.a.nrows())
            .map(|i| self.a.row(i).norm_squared())
            .fold(0.0, f64::max)
    }

    /// Minimizer of `f(x) + (lambda/2)‖x‖²`. With `lambda = 0` and a
    /// rank-deficient design this is the least-norm minimizer.
    pub fn solve_regularized(&self, lambda: f64) -> Result<ParamVector> {
        if lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty modulus must be nonnegative, got {lambda}"
            )));
        }
        let n = self.a.nrows() as f64;
        if lambda == 0.0 {
            let svd = self.a.clone().svd(true, true);
            let x = svd
                .solve(&self.b, 1e-12)
                .map_err(|e| Error::InvalidArgument(format!("singular solve failed: {e}")))?;
            return Ok(ParamVector::from_flat(x.as_slice().to_vec()));
        }
        let mut lhs = (self.a.transpose() * &self.a) / n;
        for i in 0..lhs.nrows() {
            lhs[(i, i)] += lambda;
        }
        let rhs = (self.a.transpose() * &self.b) / n;
        let chol = Cholesky::new(lhs).ok_or_else(|| {
            Error::InvalidArgument("regularized normal equations are not positive definite".into())
        })?;
        let x = chol.solve(&rhs);
        Ok(ParamVector::from_flat(x.as_slice().to_vec()))
    }
}

impl StochasticObjective for RidgeProblem {
    fn value(&self, x: &ParamVector, batch: &Batch) -> f64 {
        let mut total = 0.0;
        for &i in batch.indices() {
            let r = row_dot(&self.a, i, x.data()) - self.b[i];
            total += 0.5 * r * r;
        }
        total / batch.size() as f64
    }

    fn gradient(&self, x: &ParamVector, batch: &Batch) -> ParamVector {
        let mut g = vec![0.0; self.a.ncols()];
        let w = 1.0 / batch.size() as f64;
        for &i in batch.indices() {
            let r = (row_dot(&self.a, i, x.data()) - self.b[i]) * w;
            for j in 0..self.a.ncols() {
                g[j] += r * self.a[(i, j)];
            }
        }
        ParamVector::from_flat(g)
    }

    fn dataset_size(&self) -> usize {
        self.a.nrows()
    }

    fn smoothness_constant(&self) -> Option<f64> {
        Some(gram_eigen_bounds(&self.a).1 / self.a.nrows() as f64)
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::from_flat(vec![0.0; self.a.ncols()])
    }
}

/// Interpolation gap of the penalized least-squares family:
///
/// `min_x [f(x) + (lambda/2)‖x‖²] − (1/N) Σ_i inf_z [f_i(z) + (lambda/2)‖z‖²]`.
///
/// The per-sample infimum has the closed form `lambda·b_i² / (2(lambda +
/// ‖a_i‖²))` (rank-one system solved exactly), so the gap costs one
/// regularized solve. It is nonnegative, vanishes as `lambda → 0` for
/// consistent targets, and measures how much the per-sample minimizers
/// disagree under the penalty.
pub fn sigma2(problem: &RidgeProblem, lambda: f64) -> Result<f64> {
    let x_star = problem.solve_regularized(lambda)?;
    let full_batch = Batch::all(problem.dataset_size());
    let reg_min = problem.value(&x_star, &full_batch) + 0.5 * lambda * x_star.norm_sq();

    let mut per_sample = 0.0;
    for i in 0..problem.dataset_size() {
        let asq = problem.a.row(i).norm_squared();
        let b = problem.b[i];
        per_sample += if asq == 0.0 {
            0.5 * b * b
        } else if lambda == 0.0 {
            0.0
        } else {
            lambda * b * b / (2.0 * (lambda + asq))
        };
    }
    per_sample /= problem.dataset_size() as f64;
    Ok(reg_min - per_sample)
}

/// Binary logistic regression `f(x; i) = log(1 + exp(−l_i·a_i·x))` with
/// labels `l_i ∈ {−1, +1}`, averaged over batches.
pub struct LogisticProblem {
    a: DMatrix<f64>,
    labels: Vec<f64>,
}

fn softplus(t: f64) -> f64 {
    // log(1 + e^t) without overflow on either tail.
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl LogisticProblem {
    pub fn new(a: DMatrix<f64>, labels: Vec<f64>) -> Result<LogisticProblem> {
        if a.nrows() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "matrix has {} rows but {} labels were given",
                a.nrows(),
                labels.len()
            )));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidArgument("empty design matrix".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidArgument(format!(
                "labels must be +1 or -1, found {bad}"
            )));
        }
        Ok(LogisticProblem { a, labels })
    }

    /// Standard-normal design, labels from a random hyperplane with 10% of
    /// them flipped so the data is not linearly separable.
    pub fn generate(n_rows: usize, n_cols: usize, seed: u64) -> LogisticProblem {
        let mut design_rng = RngStream::substream(seed, 1);
        let mut a = DMatrix::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                a[(i, j)] = design_rng.standard_normal();
            }
        }
        let mut plane_rng = RngStream::substream(seed, 2);
        let w: Vec<f64> = (0..n_cols).map(|_| plane_rng.standard_normal()).collect();
        let mut flip_rng = RngStream::substream(seed, 3);
        let labels = (0..n_rows)
            .map(|i| {
                let side = if row_dot(&a, i, &w) >= 0.0 { 1.0 } else { -1.0 };
                if flip_rng.uniform01() < 0.1 {
                    -side
                } else {
                    side
                }
            })
            .collect();
        LogisticProblem { a, labels }
    }

    pub fn n_features(&self) -> usize {
        self.a.ncols()
    }
}

impl StochasticObjective for LogisticProblem {
    fn value(&self, x: &ParamVector, batch: &Batch) -> f64 {
        let mut total = 0.0;
        for &i in batch.indices() {
            let margin = self.labels[i] * row_dot(&self.a, i, x.data());
            total += softplus(-margin);
        }
        total / batch.size() as f64
    }

    fn gradient(&self, x: &ParamVector, batch: &Batch) -> ParamVector {
        let mut g = vec![0.0; self.a.ncols()];
        let w = 1.0 / batch.size() as f64;
        for &i in batch.indices() {
            let margin = self.labels[i] * row_dot(&self.a, i, x.data());
            // d softplus(−m)/dm = −sigmoid(−m)
            let coeff = -self.labels[i] / (1.0 + margin.exp()) * w;
            for j in 0..self.a.ncols() {
                g[j] += coeff * self.a[(i, j)];
            }
        }
        ParamVector::from_flat(g)
    }

    fn dataset_size(&self) -> usize {
        self.a.nrows()
    }

    fn smoothness_constant(&self) -> Option<f64> {
        // per-sample curvature is at most ‖a_i‖²/4
        Some(gram_eigen_bounds(&self.a).1 / (4.0 * self.a.nrows() as f64))
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::from_flat(vec![0.0; self.a.ncols()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_vanishes_at_the_planted_solution() {
        let (problem, planted) = RidgeProblem::generate(15, 6, 3);
        let batch = Batch::all(problem.dataset_size());
        assert!(problem.value(&planted, &batch) < 1e-24);
        let g = problem.gradient(&planted, &batch);
        assert!(g.norm() < 1e-12);
    }

    #[test]
    fn ridge_value_matches_the_matrix_form() {
        let (problem, _) = RidgeProblem::generate(10, 4, 5);
        let x = ParamVector::from_flat(vec![0.3, -0.1, 0.8, 0.05]);
        let batch = Batch::all(10);
        let xv = DVector::from_column_slice(x.data());
        let r = &problem.a * xv - &problem.b;
        let expected = r.norm_squared() / (2.0 * 10.0);
        assert!((problem.value(&x, &batch) - expected).abs() < 1e-14);
    }

    #[test]
    fn regularized_solve_zeroes_the_composite_gradient() {
        let (problem, _) = RidgeProblem::generate(12, 5, 9);
        let lambda = 0.3;
        let x = problem.solve_regularized(lambda).unwrap();
        let mut g = problem.full_gradient(&x);
        g.add_scaled(lambda, &x);
        assert!(g.norm() < 1e-10, "composite gradient norm {}", g.norm());
    }

    #[test]
    fn eigen_moduli_bracket_the_gram_spectrum() {
        let (problem, _) = RidgeProblem::generate(30, 6, 11);
        let mu = problem.strong_convexity_modulus();
        let l = problem.smoothness_constant().unwrap();
        assert!(mu > 0.0, "tall Gaussian design should be full rank");
        assert!(l >= mu);
        // quadratic form bounds: mu ≤ vᵀ(AᵀA/N)v ≤ L for unit v
        let v = DVector::from_fn(6, |i, _| ((i + 1) as f64).sin()).normalize();
        let quad = (&problem.a * &v).norm_squared() / 30.0;
        assert!(mu <= quad + 1e-12 && quad <= l + 1e-12);
    }

    #[test]
    fn interpolation_gap_is_monotone_and_collapses_with_the_penalty() {
        let (problem, _) = RidgeProblem::generate(20, 30, 7); // underdetermined
        let s_tiny = sigma2(&problem, 1e-8).unwrap();
        let s_small = sigma2(&problem, 1e-4).unwrap();
        let s_one = sigma2(&problem, 1.0).unwrap();
        assert!(s_tiny >= 0.0 && s_small >= 0.0 && s_one >= 0.0);
        assert!(s_small < s_one);
        assert!(s_tiny < 1e-6 * s_one);
    }

    #[test]
    fn logistic_value_at_zero_is_log_two() {
        let problem = LogisticProblem::generate(25, 4, 13);
        let x = problem.initial_point();
        let batch = Batch::all(25);
        assert!((problem.value(&x, &batch) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn logistic_rejects_bad_labels() {
        let a = DMatrix::zeros(2, 2);
        assert!(LogisticProblem::new(a.clone(), vec![1.0, 0.5]).is_err());
        assert!(LogisticProblem::new(a, vec![1.0, -1.0]).is_ok());
    }

    #[test]
    fn generated_labels_are_noisy_but_correlated_with_a_hyperplane() {
        let problem = LogisticProblem::generate(400, 3, 21);
        let pos = problem.labels.iter().filter(|&&l| l == 1.0).count();
        assert!(pos > 0 && pos < 400, "both classes should appear");
        // 10% flips leave most labels explainable: optimizing briefly should
        // get the loss well below the log 2 of the trivial model.
        let mut x = problem.initial_point();
        let batch = Batch::all(400);
        for _ in 0..200 {
            let g = problem.gradient(&x, &batch);
            x.add_scaled(-1.0, &g);
        }
        assert!(problem.value(&x, &batch) < 0.45);
    }

    #[test]
    fn softplus_is_stable_in_both_tails() {
        assert_eq!(softplus(-800.0), 0.0);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
