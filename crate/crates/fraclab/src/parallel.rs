//! Bounded worker pool whose results come back in index order.

use anyhow::{Context, Result};
use rayon::prelude::*;

pub struct Pool(rayon::ThreadPool);

impl Pool {
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .context("starting worker pool")?;
        Ok(Self(pool))
    }

    /// `f(0), …, f(n−1)` computed on the pool, returned by index.
    pub fn map<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        self.0.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
