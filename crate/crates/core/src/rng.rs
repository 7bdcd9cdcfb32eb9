//! Deterministic random streams for Monte Carlo loops.
//!
//! Every sample draws from its own ChaCha stream, keyed by the run seed, a
//! phase number and the sample index. Results therefore do not depend on
//! how rayon splits the work or on the number of worker threads, and any
//! single sample can be regenerated on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator for sample `index` of phase `phase` of the run seeded with `seed`.
///
/// Phases keep unrelated loops that share one seed from reusing streams.
pub fn sample_rng(seed: u64, phase: u32, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((phase as u64) << 40) | index as u64);
    rng
}

/// Runs `f` once per sample index in `0..m`, in parallel, and returns the
/// outputs in index order.
pub fn par_samples<T, F>(m: usize, seed: u64, phase: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    (0..m)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| f(&mut sample_rng(seed, phase, i), i))
        .collect()
}

/// Parallel fold over samples. `combine` must be associative and
/// commutative (counts, minima) for the result to be deterministic.
pub fn par_fold<A, F, C>(m: usize, seed: u64, phase: u32, init: A, f: F, combine: C) -> A
where
    A: Send + Sync + Clone,
    F: Fn(&mut ChaCha8Rng, usize, &mut A) + Sync + Send,
    C: Fn(A, A) -> A + Sync + Send,
{
    (0..m)
        .into_par_iter()
        .with_min_len(256)
        .fold(
            || init.clone(),
            |mut acc, i| {
                f(&mut sample_rng(seed, phase, i), i, &mut acc);
                acc
            },
        )
        .reduce(|| init.clone(), &combine)
}
