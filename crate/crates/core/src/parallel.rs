use crate::error::{Error, Result};

/// Number of logical cores, falling back to 1.
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `f` inside a dedicated rayon pool of `workers` threads.
pub(crate) fn run_with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::InvalidOptions("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidOptions(format!("cannot start {workers} workers: {e}")))?;
    pool.install(f)
}
