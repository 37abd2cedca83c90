//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! rayon's pool; without it everything runs on the calling thread. Results are
//! always returned in index order, so both modes produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `(0..n).map(f)` collected in order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Send + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Runs `f` inside a dedicated pool of `threads` workers (parallel mode only).
    pub fn with_threads<T, F>(self, threads: usize, f: F) -> T
    where
        T: Send,
        F: FnOnce() -> T + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if threads > 0 => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => pool.install(f),
                Err(e) => {
                    log::warn!("could not build a {threads}-thread pool ({e}); using the global pool");
                    f()
                }
            },
            _ => {
                let _ = threads;
                f()
            }
        }
    }
}
