//! Ensemble evaluation with one random stream per trajectory.
//!
//! Trajectory `i` of an ensemble with root seed `s` always draws from
//! `RngStream::new(s, i)`, and results are returned in index order, so any
//! [`Executor`] (sequential here, a thread pool in the std companion crate)
//! produces bit-identical output.

use alloc::vec::Vec;

use crate::rng::RngStream;

pub trait Executor {
    /// Evaluates `f` once per trajectory index in `0..n` and returns the
    /// results in index order.
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// Evaluates `f` on the stream of each trajectory in `0..n`.
    fn map_streams<T, F>(&self, root_seed: u64, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(RngStream) -> T + Sync + Send,
    {
        self.map_indexed(n, |i| f(RngStream::new(root_seed, i as u64)))
    }
}

/// Evaluates trajectories one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
