use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Design-level train/validation/test partition (sorted index lists).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Split sizes: `ceil(0.9 n)` for training (capped so that validation and
/// test keep one design each once `n >= 3`); the rest is halved with the odd
/// design going to test.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    if n < 3 {
        return (n, 0, 0);
    }
    let train = ((9 * n).div_ceil(10)).min(n - 2);
    let rest = n - train;
    let val = rest / 2;
    (train, val, rest - val)
}

pub fn split_designs(n: usize, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    // Decorrelate from the sampling stream that used the same seed.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SPLIT_SALT);
    idx.shuffle(&mut rng);
    let (n_train, n_val, _) = split_sizes(n);
    let mut train = idx[..n_train].to_vec();
    let mut val = idx[n_train..n_train + n_val].to_vec();
    let mut test = idx[n_train + n_val..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Split { train, val, test }
}

const SPLIT_SALT: u64 = 0x5eed_5b17;
