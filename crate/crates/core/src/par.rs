//! Data-parallel helpers.
//!
//! Everything here is map-shaped: each output slot is written by exactly one
//! task and no floating-point reduction crosses a thread boundary, so results
//! are bitwise identical with parallelism on or off. With the `parallel`
//! feature disabled every helper runs sequentially.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Work items below this count stay on the calling thread.
pub const MIN_PARALLEL_LEN: usize = 2048;

/// Turn rayon dispatch on or off at runtime (no effect without the feature).
pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::Relaxed);
}

pub fn enabled() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::Relaxed)
}

/// `(0..n).map(f).collect()`, fanned out when `n` is large enough.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_range_min(n, MIN_PARALLEL_LEN, f)
}

/// Like [`map_range`] with an explicit threshold; use `1` for coarse jobs
/// such as whole solver runs.
pub fn map_range_min<T, F>(n: usize, min_len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if enabled() && n >= min_len && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = min_len;
    (0..n).map(f).collect()
}

/// Apply `f(index, item)` to every element of `items` in place.
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if enabled() && items.len() >= MIN_PARALLEL_LEN {
            use rayon::prelude::*;
            items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
    }
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Apply `f(chunk_index, chunk)` to consecutive chunks of length `chunk`.
pub fn for_each_chunk_mut<T, F>(items: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if enabled() && items.len() >= MIN_PARALLEL_LEN && items.len() > chunk {
            use rayon::prelude::*;
            items
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    items
        .chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}
