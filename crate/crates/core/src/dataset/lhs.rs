//! Latin-hypercube sampling of design vectors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::machine::{DesignParams, DesignRanges};

/// One LHS sample matrix, row-major `n x ranges.len()`. Column `j` places
/// exactly one point in each of the `n` equal strata of `ranges[j]`.
pub fn latin_hypercube(n: usize, ranges: &[crate::machine::Range], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; ranges.len()]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for (j, r) in ranges.iter().enumerate() {
        strata.shuffle(&mut rng);
        for (row, &s) in rows.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            let x = r.min + (s as f64 + u) / n as f64 * r.span();
            row[j] = x.clamp(r.min, r.max);
        }
    }
    rows
}

pub fn sample_designs(n: usize, ranges: &DesignRanges, seed: u64) -> Result<Vec<DesignParams>> {
    if n == 0 {
        return Err(Error::config("number of designs must be >= 1"));
    }
    ranges.validate()?;
    latin_hypercube(n, &ranges.per_feature(), seed)
        .iter()
        .map(|v| DesignParams::from_vector(v))
        .collect()
}
