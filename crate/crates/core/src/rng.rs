//! Deterministic randomness.
//!
//! All randomness flows from [`RngStream`], a ChaCha8 generator keyed by a
//! 64-bit seed and a stream id. ChaCha output is specified independently of
//! platform and word size, so one seed yields one batch sequence everywhere.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::Batch;

/// Named, splittable random stream. Single owner; never shared.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent sub-stream of the same seed (e.g. data generation vs. batching).
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Uniform sample of `batch_size` distinct rows, returned in ascending order.
pub fn sample_batch(rng: &mut RngStream, dataset_size: usize, batch_size: usize) -> Result<Batch> {
    if batch_size == 0 || batch_size > dataset_size {
        return Err(Error::config(format!(
            "batch size {batch_size} must lie in 1..={dataset_size}"
        )));
    }
    let mut indices = index::sample(&mut rng.rng, dataset_size, batch_size).into_vec();
    indices.sort_unstable();
    Batch::new(indices, dataset_size)
}
