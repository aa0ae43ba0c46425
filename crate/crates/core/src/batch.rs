//! Mini-batch bookkeeping.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Indices of the samples participating in one stochastic evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    indices: Vec<usize>,
}

impl Batch {
    /// A batch must contain at least one sample.
    pub fn new(indices: Vec<usize>) -> Result<Batch> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("batch must be non-empty".into()));
        }
        Ok(Batch { indices })
    }

    /// The full dataset `[0, n)` as a single batch.
    pub fn all(n: usize) -> Batch {
        Batch {
            indices: (0..n).collect(),
        }
    }

    pub fn single(i: usize) -> Batch {
        Batch { indices: vec![i] }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }
}

/// Shuffle `[0, n)` and split it into `ceil(n / batch_size)` batches.
///
/// Every sample appears in exactly one batch; only the last batch may be
/// smaller than `batch_size`. The partition depends solely on the stream
/// state, so one epoch of batches is reproducible from the seed.
pub fn make_minibatches(n: usize, batch_size: usize, rng: &mut RngStream) -> Result<Vec<Batch>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dataset is empty".into()));
    }
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
    }
    if batch_size > n {
        return Err(Error::InvalidArgument(format!(
            "batch_size {batch_size} exceeds dataset size {n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    Ok(perm
        .chunks(batch_size)
        .map(|c| Batch {
            indices: c.to_vec(),
        })
        .collect())
}
