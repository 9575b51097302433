//! Deterministic parallel evaluation of chunked estimators.

use rayon::prelude::*;
use rayon::ThreadPool;

use mmwc_core::rng::Stream;
use mmwc_core::walk::{Chunked, Tally};

pub fn thread_pool(parallelism: usize) -> anyhow::Result<ThreadPool> {
    anyhow::ensure!(parallelism >= 1, "parallelism must be at least 1");
    Ok(rayon::ThreadPoolBuilder::new().num_threads(parallelism).build()?)
}

/// Same result as [`mmwc_core::walk::run_chunks`]: chunks run in parallel
/// and their tallies are merged in chunk order.
pub fn run_chunks_parallel<C: Chunked>(est: &C, samples: u64, seed: u64, pool: &ThreadPool) -> C::Output {
    let plan = est.chunk_plan(samples);
    let tallies: Vec<C::Tally> = pool.install(|| {
        plan.par_iter()
            .map(|&(index, count)| est.run_chunk(&mut Stream::new(seed, index), count))
            .collect()
    });
    let mut total = est.empty();
    for t in tallies {
        total.merge(t);
    }
    est.finish(total)
}
