use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::{Error, Result};

/// Seeded permutation of `0..n` cut into `(train, test)` index lists.
///
/// The training side gets `floor(n · train_fraction)` rows.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    // The epsilon keeps products like 1030 · 0.7 from flooring one short.
    let n_train = ((n as f64) * train_fraction + 1e-9).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Config(format!(
            "splitting {n} samples at fraction {train_fraction} leaves an empty side"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = perm.split_off(n_train);
    Ok((perm, test))
}

pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset.len(), train_fraction, seed)?;
    Ok((dataset.select_rows(&train), dataset.select_rows(&test)))
}
