//! Data-parallel execution with a sequential fallback.
//!
//! Work items are addressed by index and each derives its own random
//! substream, so results are identical under either backend.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Rayon's global pool. Without the `parallel` feature this runs
    /// sequentially.
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// Ordered map over `0..n`.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Parallelism::Rayon => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Histogram of `f(i)` over `0..n` into `bins` buckets.
    pub fn histogram<F>(self, n: usize, bins: usize, f: F) -> Vec<u64>
    where
        F: Fn(usize) -> usize + Sync + Send,
    {
        let add = |mut acc: Vec<u64>, i: usize| {
            acc[f(i)] += 1;
            acc
        };
        match self {
            #[cfg(feature = "parallel")]
            Parallelism::Rayon => {
                use rayon::prelude::*;
                (0..n)
                    .into_par_iter()
                    .fold(|| vec![0u64; bins], add)
                    .reduce(
                        || vec![0u64; bins],
                        |mut a, b| {
                            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                            a
                        },
                    )
            }
            _ => (0..n).fold(vec![0u64; bins], add),
        }
    }
}
