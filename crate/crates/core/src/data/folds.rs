use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Number of test points for a shuffle split: `round(n * test_fraction)`,
/// kept within `1..n`.
pub fn test_size(n: usize, test_fraction: f64) -> usize {
    ((n as f64 * test_fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Independent shuffle splits; fold `k` draws from stream `k` of the seeded
/// generator, so folds do not depend on how many are requested. Index lists
/// are returned sorted.
pub fn split_folds(n: usize, n_folds: usize, test_fraction: f64, seed: u64) -> Result<Vec<Fold>> {
    if n < 2 {
        return Err(Error::Empty(format!("cannot split {n} points")));
    }
    if n_folds == 0 {
        return Err(Error::InvalidParameter("n_folds must be >= 1".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("test_fraction must be in (0, 1), got {test_fraction}")));
    }
    let n_test = test_size(n, test_fraction);
    Ok((0..n_folds)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut test = perm[..n_test].to_vec();
            let mut train = perm[n_test..].to_vec();
            test.sort_unstable();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect())
}
