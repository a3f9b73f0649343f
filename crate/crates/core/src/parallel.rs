//! Data-parallel trial execution with a sequential fallback.
//!
//! Trials receive their index and derive an independent rng stream from it,
//! so the parallel and sequential paths produce identical results; outputs
//! come back in index order either way.

/// Run `count` independent trials, in parallel when the `parallel` feature
/// is enabled.
#[cfg(feature = "parallel")]
pub fn run_trials<T: Send, F: Fn(usize) -> T + Send + Sync>(count: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_trials<T: Send, F: Fn(usize) -> T + Send + Sync>(count: usize, f: F) -> Vec<T> {
    run_trials_seq(count, f)
}

/// Always-sequential twin of [`run_trials`], kept for benchmarking both
/// paths against each other.
pub fn run_trials_seq<T: Send, F: Fn(usize) -> T + Send + Sync>(count: usize, f: F) -> Vec<T> {
    (0..count).map(f).collect()
}
