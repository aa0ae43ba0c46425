//! Benchmark problems: synthetic matrix factorization, least squares, and
//! logistic regression, plus text serialization for their datasets.

mod csv;
mod matrix_fac;
mod regression;

pub use csv::{format_f64, matrix_from_csv, matrix_to_csv};
pub use matrix_fac::{
    gen_matrix_fac, matrixfac_objective, Dataset, MatrixFacConfig, MatrixFacObjective,
};
pub use regression::{sigma2, LogisticProblem, RidgeProblem};
