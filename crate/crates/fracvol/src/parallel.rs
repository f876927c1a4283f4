//! Thread-pool driver for path-level Monte Carlo.
//!
//! Streams are evaluated in parallel but collected in stream order and
//! reduced by [`pairwise_sum`](fracvol_core::montecarlo::pairwise_sum), so
//! every estimate is bit-identical for any thread count.

use fracvol_core::montecarlo::{McEstimate, ModelPath, Simulator};
use rayon::prelude::*;

use crate::error::{AppError, AppResult};

/// Pool with `threads` workers (`None`: one per core).
pub fn pool(threads: Option<usize>) -> AppResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(AppError::Config("thread count must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| AppError::Config(e.to_string()))
}

/// `f(k)` for `k = 0..n`, in order.
pub fn map_streams<T, F>(pool: &rayon::ThreadPool, n: usize, f: F) -> AppResult<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> fracvol_core::Result<T> + Sync,
{
    pool.install(|| (0..n as u64).into_par_iter().map(&f).collect::<fracvol_core::Result<Vec<T>>>())
        .map_err(AppError::from)
}

/// One sample per stream: the mean of `f` over the stream's paths.
pub fn stream_values<F>(pool: &rayon::ThreadPool, sim: &Simulator, f: F) -> AppResult<Vec<f64>>
where
    F: Fn(&ModelPath) -> f64 + Sync,
{
    map_streams(pool, sim.n_streams(), |k| sim.stream_value(k, &f))
}

/// Parallel counterpart of [`Simulator::estimate`].
pub fn estimate<F>(pool: &rayon::ThreadPool, sim: &Simulator, f: F) -> AppResult<McEstimate>
where
    F: Fn(&ModelPath) -> f64 + Sync,
{
    Ok(McEstimate::from_samples(&stream_values(pool, sim, f)?)?)
}
