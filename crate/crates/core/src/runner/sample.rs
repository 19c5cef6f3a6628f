use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mix_seed;
use crate::error::{Error, Result};

/// Indices of `n` distinct items out of `len`, ascending.
pub fn sample_indices(len: usize, n: usize, seed: u64, repeat_index: usize) -> Result<Vec<usize>> {
    if n > len {
        return Err(Error::arg(format!("cannot sample {n} of {len} instances")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, repeat_index as u64));
    let mut picked = rand::seq::index::sample(&mut rng, len, n).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Sampling without replacement, reproducible in `(seed, repeat_index)`.
pub fn sample_instances<T: Clone>(dataset: &[T], n: usize, seed: u64, repeat_index: usize) -> Result<Vec<T>> {
    Ok(sample_indices(dataset.len(), n, seed, repeat_index)?
        .into_iter()
        .map(|i| dataset[i].clone())
        .collect())
}
