//! Batch execution helpers.
//!
//! Every batch in the crate is a pure function of an index, so parallel and
//! sequential runs return identical, index-ordered results.

/// How a batch is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled; otherwise
    /// falls back to [`ExecMode::Sequential`].
    #[default]
    Parallel,
}

impl ExecMode {
    /// `jobs <= 1` selects sequential execution.
    pub fn from_jobs(jobs: usize) -> Self {
        if jobs <= 1 {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indices<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == ExecMode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Map `f` over a slice, collecting results in order.
pub fn map_slice<I, T, F>(mode: ExecMode, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indices(mode, items.len(), |i| f(&items[i]))
}

/// Run `f` inside a pool of `jobs` threads (or the global pool when `jobs`
/// is zero).
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}
