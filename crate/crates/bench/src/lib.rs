//! Shared fixtures for the criterion benches.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scnlab::numkit::Matrix;

/// Random hidden blocks and a target, shaped like a small solved ensemble.
pub fn random_system_parts(n: usize, widths: &[usize], seed: u64) -> (Vec<Matrix>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = widths
        .iter()
        .map(|&w| Matrix::from_fn(n, w, |_, _| rng.random::<f64>() * 2.0 - 1.0))
        .collect();
    let y = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    (blocks, y)
}
