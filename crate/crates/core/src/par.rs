//! Data-parallel batch evaluation with a sequential fallback.
//!
//! With the `parallel` feature (default), `map_batch` fans work out over
//! rayon; without it, the same call runs sequentially. `map_batch_seq` is
//! always sequential and exists so benches can compare both paths in one
//! build. Output order matches input order either way, which keeps CSV
//! emission deterministic regardless of scheduling.

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
pub fn map_batch<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential reference path for `map_batch`.
pub fn map_batch_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Run `f` inside a rayon pool with `workers` threads (0 = rayon default).
/// Without the `parallel` feature the worker count is ignored.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            f()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool")
                .install(f)
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
