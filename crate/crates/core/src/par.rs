//! Trial-level data parallelism.
//!
//! Every Monte-Carlo loop in the crate runs through these helpers. With the
//! `parallel` feature (default) trials are spread over the rayon pool;
//! without it, or with [`Exec::Sequential`], they run in order on the calling
//! thread. Each trial owns its RNG stream and reductions are associative and
//! commutative, so results do not depend on the execution strategy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether trials will actually run on the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Master seed plus trial count for a Monte-Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trials {
    pub count: u64,
    pub seed: u64,
    pub exec: Exec,
}

impl Trials {
    pub fn new(count: u64, seed: u64) -> Trials {
        Trials {
            count,
            seed,
            exec: Exec::default(),
        }
    }

    pub fn sequential(self) -> Trials {
        Trials {
            exec: Exec::Sequential,
            ..self
        }
    }

    pub fn with_exec(self, exec: Exec) -> Trials {
        Trials { exec, ..self }
    }

    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        trial_rng(self.seed, trial)
    }
}

/// The RNG for one trial: the master seed selects the key, the trial index
/// selects one of the 2^64 ChaCha streams.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Maps every trial index, preserving order in the output.
pub fn map_trials<T, F>(exec: Exec, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Folds trials into per-worker accumulators and merges them. `merge` must be
/// associative and commutative for the result to be schedule independent.
pub fn fold_trials<A, I, F, M>(exec: Exec, count: u64, identity: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, u64) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..count)
            .into_par_iter()
            .fold(&identity, &fold)
            .reduce(&identity, &merge);
    }
    let _ = &merge;
    let _ = exec;
    (0..count).fold(identity(), fold)
}

/// Like [`fold_trials`] but stops at the first error.
pub fn try_fold_trials<A, E, I, F, M>(
    exec: Exec,
    count: u64,
    identity: I,
    fold: F,
    merge: M,
) -> Result<A, E>
where
    A: Send,
    E: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, u64) -> Result<A, E> + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..count)
            .into_par_iter()
            .try_fold(&identity, &fold)
            .try_reduce(&identity, |a, b| Ok(merge(a, b)));
    }
    let _ = &merge;
    let _ = exec;
    let mut acc = identity();
    for t in 0..count {
        acc = fold(acc, t)?;
    }
    Ok(acc)
}
