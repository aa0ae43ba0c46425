//! Synthetic two-factor matrix recovery.
//!
//! The ground truth is a `q×p` matrix `A = D·B` with `B` uniform on `[0, 1]`
//! and `D` diagonal with entries running from 1 down to a configurable tail
//! on a logarithmic grid, so the tail directly sets the conditioning.
//! Training targets come from a perturbed copy `Ã = A ∘ (1 + E)` applied to
//! Gaussian inputs; validation targets use the clean `A` on fresh inputs.
//! The model is the product `W2·W1` of an `r×p` and a `q×r` factor, fitted
//! by the squared residual per sample.

use std::fs;
use std::io;
use std::path::Path;

use nalgebra::DMatrix;

use crate::batch::Batch;
use crate::objective::StochasticObjective;
use crate::param::{Layout, ParamVector};
use crate::rng::RngStream;

use super::csv::{matrix_from_csv, matrix_to_csv};

/// Generation recipe for one synthetic instance.
#[derive(Clone, Debug)]
pub struct MatrixFacConfig {
    /// Input dimension (columns of the ground-truth matrix).
    pub p: usize,
    /// Output dimension (rows of the ground-truth matrix).
    pub q: usize,
    /// Number of training samples (the validation set matches it).
    pub n_samples: usize,
    /// Last entry of the log-spaced diagonal whose first entry is 1;
    /// values below 1 make the instance ill-conditioned.
    pub diag_last: f64,
    /// Factor width `r` of the model to be fitted.
    pub rank: usize,
    /// Relative amplitude of the entrywise perturbation applied to the
    /// ground truth before generating training targets; 0 disables it.
    pub noise: f64,
    pub seed: u64,
}

impl MatrixFacConfig {
    fn validate(&self) {
        assert!(self.p >= 1 && self.q >= 1, "matrix dimensions must be positive");
        assert!(self.n_samples >= 1, "need at least one sample");
        assert!(self.rank >= 1, "factor width must be at least 1");
        assert!(
            self.diag_last > 0.0 && self.diag_last.is_finite(),
            "diagonal tail must be positive and finite"
        );
        assert!(
            self.noise >= 0.0 && self.noise.is_finite(),
            "noise amplitude must be nonnegative and finite"
        );
    }
}

/// Inputs/targets for training plus a clean validation split.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// `N×p`, one input per row.
    pub inputs: DMatrix<f64>,
    /// `N×q`, one target per row.
    pub targets: DMatrix<f64>,
    pub val_inputs: DMatrix<f64>,
    pub val_targets: DMatrix<f64>,
    /// Seed the instance was generated from; parameter initialization is
    /// derived from it so that runs differing only in their shuffling seed
    /// start from the same point.
    pub seed: u64,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.inputs.nrows()
    }

    /// Write the four matrices as `inputs.csv`, `targets.csv`,
    /// `val_inputs.csv`, `val_targets.csv` plus a `seed` file.
    pub fn save_csv(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("inputs.csv"), matrix_to_csv(&self.inputs))?;
        fs::write(dir.join("targets.csv"), matrix_to_csv(&self.targets))?;
        fs::write(dir.join("val_inputs.csv"), matrix_to_csv(&self.val_inputs))?;
        fs::write(dir.join("val_targets.csv"), matrix_to_csv(&self.val_targets))?;
        fs::write(dir.join("seed"), format!("{}\n", self.seed))
    }

    pub fn load_csv(dir: &Path) -> io::Result<Dataset> {
        let read_matrix = |name: &str| -> io::Result<DMatrix<f64>> {
            let text = fs::read_to_string(dir.join(name))?;
            matrix_from_csv(&text)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{name}: {e}")))
        };
        let seed_text = fs::read_to_string(dir.join("seed"))?;
        let seed = seed_text
            .trim()
            .parse()
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bad seed file"))?;
        Ok(Dataset {
            inputs: read_matrix("inputs.csv")?,
            targets: read_matrix("targets.csv")?,
            val_inputs: read_matrix("val_inputs.csv")?,
            val_targets: read_matrix("val_targets.csv")?,
            seed,
        })
    }
}

// Substream tags for the independent pieces of the generator.
const TAG_BASE: u64 = 1;
const TAG_NOISE: u64 = 2;
const TAG_TRAIN: u64 = 3;
const TAG_VAL: u64 = 4;
const TAG_INIT: u64 = 5;

/// Generate an instance; returns the dataset and the clean ground-truth
/// matrix `A` (`q×p`).
pub fn gen_matrix_fac(config: &MatrixFacConfig) -> (Dataset, DMatrix<f64>) {
    config.validate();
    let (p, q, n) = (config.p, config.q, config.n_samples);

    // Base matrix, filled row-major with uniform [0, 1) draws.
    let mut base_rng = RngStream::substream(config.seed, TAG_BASE);
    let mut b = DMatrix::zeros(q, p);
    for i in 0..q {
        for j in 0..p {
            b[(i, j)] = base_rng.uniform01();
        }
    }

    // Diagonal scaling, log-spaced from 1 down to diag_last.
    let log_tail = config.diag_last.log10();
    let diag = |i: usize| -> f64 {
        if q == 1 {
            1.0
        } else {
            10f64.powf(log_tail * i as f64 / (q - 1) as f64)
        }
    };
    let mut a = b.clone();
    for i in 0..q {
        let d = diag(i);
        for j in 0..p {
            a[(i, j)] *= d;
        }
    }

    // Perturbed copy used for the training targets.
    let mut noise_rng = RngStream::substream(config.seed, TAG_NOISE);
    let mut a_tilde = a.clone();
    if config.noise > 0.0 {
        for i in 0..q {
            for j in 0..p {
                a_tilde[(i, j)] *= 1.0 + noise_rng.uniform(-config.noise, config.noise);
            }
        }
    }

    let sample_split = |rng: &mut RngStream, with: &DMatrix<f64>| {
        let mut inputs = DMatrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                inputs[(i, j)] = rng.standard_normal();
            }
        }
        let targets = &inputs * with.transpose(); // row i is `with · input_i`
        (inputs, targets)
    };
    let (inputs, targets) = sample_split(&mut RngStream::substream(config.seed, TAG_TRAIN), &a_tilde);
    let (val_inputs, val_targets) = sample_split(&mut RngStream::substream(config.seed, TAG_VAL), &a);

    (
        Dataset {
            inputs,
            targets,
            val_inputs,
            val_targets,
            seed: config.seed,
        },
        a,
    )
}

/// Squared-residual loss of the factored model on a [`Dataset`].
///
/// Parameters live in two named segments: `W1` (`r×p`, row-major) and `W2`
/// (`q×r`, row-major). The per-sample loss is `‖W2·W1·y − b‖²`; batch value
/// and gradient average over the batch.
pub struct MatrixFacObjective {
    dataset: Dataset,
    rank: usize,
    p: usize,
    q: usize,
    init: ParamVector,
}

/// Build the objective; the starting point (standard normal entries scaled
/// by `1/sqrt(r)`) is derived from the dataset seed, so every run on this
/// dataset starts from the same factors.
pub fn matrixfac_objective(dataset: Dataset, rank: usize) -> MatrixFacObjective {
    assert!(rank >= 1, "factor width must be at least 1");
    let p = dataset.inputs.ncols();
    let q = dataset.targets.ncols();
    assert_eq!(
        dataset.inputs.nrows(),
        dataset.targets.nrows(),
        "inputs/targets row mismatch"
    );
    let layout = Layout::new(&[("W1", rank * p), ("W2", q * rank)]);
    let mut rng = RngStream::substream(dataset.seed, TAG_INIT);
    let scale = 1.0 / (rank as f64).sqrt();
    let mut init = ParamVector::zeros(layout);
    for v in init.data_mut() {
        *v = rng.standard_normal() * scale;
    }
    MatrixFacObjective {
        dataset,
        rank,
        p,
        q,
        init,
    }
}

impl MatrixFacObjective {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn layout(&self) -> &std::sync::Arc<Layout> {
        self.init.layout()
    }

    /// Residual `W2·W1·y − b` for one row of an input/target pair.
    fn residual(
        &self,
        x: &ParamVector,
        inputs: &DMatrix<f64>,
        targets: &DMatrix<f64>,
        row: usize,
        hidden: &mut [f64],
        out: &mut [f64],
    ) {
        let w1 = x.segment("W1").expect("layout fixed at construction");
        let w2 = x.segment("W2").expect("layout fixed at construction");
        let (r, p, q) = (self.rank, self.p, self.q);
        for a in 0..r {
            let mut acc = 0.0;
            for j in 0..p {
                acc += w1[a * p + j] * inputs[(row, j)];
            }
            hidden[a] = acc;
        }
        for c in 0..q {
            let mut acc = 0.0;
            for a in 0..r {
                acc += w2[c * r + a] * hidden[a];
            }
            out[c] = acc - targets[(row, c)];
        }
    }

    fn mean_sq_residual(
        &self,
        x: &ParamVector,
        inputs: &DMatrix<f64>,
        targets: &DMatrix<f64>,
        rows: impl Iterator<Item = usize>,
    ) -> f64 {
        let mut hidden = vec![0.0; self.rank];
        let mut out = vec![0.0; self.q];
        let mut total = 0.0;
        let mut count = 0usize;
        for row in rows {
            self.residual(x, inputs, targets, row, &mut hidden, &mut out);
            total += out.iter().map(|v| v * v).sum::<f64>();
            count += 1;
        }
        total / count as f64
    }
}

impl StochasticObjective for MatrixFacObjective {
    fn value(&self, x: &ParamVector, batch: &Batch) -> f64 {
        self.mean_sq_residual(
            x,
            &self.dataset.inputs,
            &self.dataset.targets,
            batch.indices().iter().copied(),
        )
    }

    fn gradient(&self, x: &ParamVector, batch: &Batch) -> ParamVector {
        let w2 = x.segment("W2").expect("layout fixed at construction").to_vec();
        let (r, p, q) = (self.rank, self.p, self.q);
        let mut grad = ParamVector::zeros(x.layout().clone());
        let mut hidden = vec![0.0; r];
        let mut out = vec![0.0; q];
        let weight = 2.0 / batch.size() as f64;
        for &row in batch.indices() {
            self.residual(x, &self.dataset.inputs, &self.dataset.targets, row, &mut hidden, &mut out);
            {
                let gw2 = grad.segment_mut("W2").expect("layout fixed");
                for c in 0..q {
                    let uc = out[c] * weight;
                    for a in 0..r {
                        gw2[c * r + a] += uc * hidden[a];
                    }
                }
            }
            {
                let gw1 = grad.segment_mut("W1").expect("layout fixed");
                for a in 0..r {
                    let mut back = 0.0;
                    for c in 0..q {
                        back += w2[c * r + a] * out[c];
                    }
                    back *= weight;
                    for j in 0..p {
                        gw1[a * p + j] += back * self.dataset.inputs[(row, j)];
                    }
                }
            }
        }
        grad
    }

    fn dataset_size(&self) -> usize {
        self.dataset.n_samples()
    }

    fn initial_point(&self) -> ParamVector {
        self.init.clone()
    }

    fn validation_metric(&self, x: &ParamVector) -> Option<f64> {
        Some(self.mean_sq_residual(
            x,
            &self.dataset.val_inputs,
            &self.dataset.val_targets,
            0..self.dataset.val_inputs.nrows(),
        ))
    }
}
