//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) `Execution::Parallel` runs on rayon;
//! without it every request runs sequentially. Results never depend on the
//! choice: callers only use ordered maps whose outputs are reduced in index
//! order.

/// How to run independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// `workers == 0` uses rayon's global pool.
    Parallel { workers: usize },
    #[default]
    Auto,
}

impl Execution {
    /// `1` worker means sequential.
    pub fn with_workers(workers: usize) -> Self {
        match workers {
            1 => Execution::Sequential,
            w => Execution::Parallel { workers: w },
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Execution::Sequential)
    }
}

/// `(0..len).map(f).collect()`, possibly in parallel, output in index order.
pub fn map_indexed<R, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..len).into_par_iter().map(&f).collect::<Vec<_>>();
        match exec {
            Execution::Sequential => {}
            Execution::Auto | Execution::Parallel { workers: 0 } => return run(),
            Execution::Parallel { workers } => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                    return pool.install(run);
                }
            }
        }
    }
    let _ = exec;
    (0..len).map(f).collect()
}
