//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in input order so callers can reduce in a
//! fixed order. The reduction tree is therefore independent of the thread
//! count, and `Threads` and `Sequential` produce bitwise-identical results.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    /// Rayon worker pool. Falls back to sequential when the `parallel`
    /// feature is disabled.
    #[default]
    Threads,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Threads
    }
}

/// Applies `f` to every item, preserving order.
pub fn map_indexed<T, R, Fun>(items: &[T], par: Parallelism, f: Fun) -> Vec<R>
where
    T: Sync,
    R: Send,
    Fun: Fn(usize, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let _ = par;
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Applies `f` to every index in `0..n`, preserving order.
pub fn map_range<R, Fun>(n: usize, par: Parallelism, f: Fun) -> Vec<R>
where
    R: Send,
    Fun: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..n).map(f).collect()
}
