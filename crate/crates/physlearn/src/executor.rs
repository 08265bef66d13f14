use std::sync::Arc;

use physlearn_core::ensemble::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Evaluates trajectories on a rayon pool. Results come back in index
/// order, so output matches [`physlearn_core::ensemble::Sequential`] bit for
/// bit whatever the thread count.
#[derive(Debug, Clone, Default)]
pub struct Parallel {
    pool: Option<Arc<ThreadPool>>,
}

impl Parallel {
    /// Uses rayon's global pool.
    pub fn global() -> Self {
        Self::default()
    }

    /// Uses a dedicated pool of `threads` workers; `0` picks rayon's default.
    pub fn with_threads(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool: Some(Arc::new(pool)) })
    }
}

impl Executor for Parallel {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let work = || (0..n).into_par_iter().map(&f).collect();
        match &self.pool {
            Some(pool) => pool.install(work),
            None => work(),
        }
    }
}
