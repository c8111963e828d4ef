//! Execution control for the search modules.
//!
//! Searches split their decision tree into a canonical frontier of subtree
//! tasks; the tasks run either sequentially or on a rayon pool. Results are
//! merged in frontier order, so the output is identical for every setting.
//! Without the `parallel` feature every mode degrades to sequential.

/// Thread policy for a search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threads {
    /// Run on the calling thread.
    Sequential,
    /// Use a rayon pool with the default thread count.
    Auto,
    /// Use a rayon pool with exactly this many threads.
    Fixed(usize),
}

impl Default for Threads {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Threads::Auto
        } else {
            Threads::Sequential
        }
    }
}

impl Threads {
    fn effective_sequential(self) -> bool {
        match self {
            Threads::Sequential | Threads::Fixed(0) | Threads::Fixed(1) => true,
            _ => !cfg!(feature = "parallel"),
        }
    }
}

/// Run `f(0..n)` and collect results in index order, sequentially or on a
/// rayon pool according to `threads`.
pub(crate) fn run_indexed<T, F>(threads: Threads, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if threads.effective_sequential() || n <= 1 {
        return (0..n).map(f).collect();
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let body = || (0..n).into_par_iter().map(&f).collect();
        match threads {
            Threads::Fixed(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .expect("thread pool construction")
                .install(body),
            _ => body(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
