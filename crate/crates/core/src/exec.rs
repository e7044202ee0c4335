//! Execution backends for the Monte Carlo loops.
//!
//! Every independent unit of work (one simulation, one net) is addressed by a
//! dense index. The randomness for unit `i` comes from the ChaCha stream `i`
//! of the master seed, so the output is a pure function of `(seed, i)` no
//! matter how the units are scheduled. With the `parallel` feature the units
//! are spread over rayon; without it, or with [`Workers::Sequential`], they run
//! in index order on the calling thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How many threads a Monte Carlo loop may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// Rayon's global pool (all available cores).
    #[default]
    Auto,
    /// Run on the calling thread.
    Sequential,
    /// A dedicated pool of exactly this many threads.
    Threads(usize),
}

impl Workers {
    /// `0` means all cores, `1` means sequential.
    pub fn from_count(n: usize) -> Self {
        match n {
            0 => Workers::Auto,
            1 => Workers::Sequential,
            n => Workers::Threads(n),
        }
    }
}

/// Number of simulations, master seed and thread budget for one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimPlan {
    pub n_sims: usize,
    pub seed: u64,
    pub workers: Workers,
}

impl SimPlan {
    pub fn new(n_sims: usize, seed: u64) -> Self {
        SimPlan {
            n_sims,
            seed,
            workers: Workers::Auto,
        }
    }

    pub fn with_workers(mut self, workers: Workers) -> Self {
        self.workers = workers;
        self
    }
}

/// The random stream owned by work unit `index` under `master_seed`.
pub fn unit_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Units are grouped into batches so per-batch scratch space is reused.
pub(crate) const BATCH: usize = 256;

/// Evaluate `f(batch_range)` for consecutive batches covering `0..n` and
/// return the results in batch order.
pub(crate) fn map_batches<T, F>(workers: Workers, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let n_batches = n.div_ceil(BATCH);
    let range_of = |b: usize| b * BATCH..((b + 1) * BATCH).min(n);
    run(workers, n_batches, |b| f(range_of(b)))
}

#[cfg(feature = "parallel")]
fn run<T, F>(workers: Workers, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match workers {
        Workers::Sequential => (0..n).map(f).collect(),
        Workers::Auto => (0..n).into_par_iter().map(f).collect(),
        Workers::Threads(threads) => match rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
        {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("could not build a {threads}-thread pool ({e}); running sequentially");
                (0..n).map(f).collect()
            }
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn run<T, F>(_workers: Workers, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
