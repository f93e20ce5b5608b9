//! Index-ordered map over trajectory indices, parallel when the `parallel`
//! feature is on.
//!
//! Results are collected in index order and merged with pairwise summation
//! by the callers, so the outcome is identical for any worker count —
//! including the sequential fallback build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential map, always available; the baseline the parallel path must
/// reproduce bit for bit.
pub fn seq_try_map<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    F: Fn(usize) -> Result<T, E> + Sync + Send,
    T: Send,
    E: Send,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn par_try_map<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    F: Fn(usize) -> Result<T, E> + Sync + Send,
    T: Send,
    E: Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Maps `0..count` with the best available strategy.
pub fn try_map<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    F: Fn(usize) -> Result<T, E> + Sync + Send,
    T: Send,
    E: Send,
{
    #[cfg(feature = "parallel")]
    {
        par_try_map(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq_try_map(count, f)
    }
}

/// Infallible variant of [`try_map`].
pub fn map<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    let result: Result<Vec<T>, std::convert::Infallible> = try_map(count, |i| Ok(f(i)));
    match result {
        Ok(v) => v,
    }
}
