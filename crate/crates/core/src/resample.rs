//! Replicate-keyed bootstrap draws.
//!
//! Replicate `b` of a run with seed `s` always sees the same random stream,
//! whatever the thread count or scheduling order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest tolerated share of failed replicates.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Derives an independent seed for a named sub-task from a master seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the seed through splitmix64.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bootstrap multiplicities of the `window` rows of an `n_total` sample.
///
/// Equivalent in distribution to drawing `n_total` rows with replacement and
/// counting how often each window row appears.
pub fn window_multiplicities<R: Rng>(rng: &mut R, n_total: usize, window: usize) -> Vec<f64> {
    let mut counts = vec![0.0; window];
    if window == 0 || n_total == 0 {
        return counts;
    }
    let p = (window as f64 / n_total as f64).min(1.0);
    let k = Binomial::new(n_total as u64, p)
        .map(|b| b.sample(rng))
        .unwrap_or(n_total as u64);
    for _ in 0..k {
        counts[rng.random_range(0..window)] += 1.0;
    }
    counts
}

/// Full-sample bootstrap multiplicities.
pub fn multiplicities<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1.0;
    }
    counts
}

/// Runs `f` for replicates `0..b` in parallel; results come back in replicate order.
pub fn run_replicates<T, F>(b: usize, seed: u64, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..b as u64)
        .into_par_iter()
        .map(|i| f(&mut replicate_rng(seed, i)))
        .collect()
}

/// Keeps successful replicates; errors when more than 10% failed.
pub fn collect_successes<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, usize)> {
    let total = results.len();
    let ok: Vec<T> = results.into_iter().filter_map(|r| r.ok()).collect();
    let failed = total - ok.len();
    if ok.is_empty() || failed as f64 > MAX_FAILED_FRACTION * total as f64 {
        return Err(Error::TooManyFailedReplicates { failed, total });
    }
    Ok((ok, failed))
}

/// Sample standard deviation (n − 1 denominator), summed in input order.
pub fn std_dev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}
