//! Data-parallel plumbing.
//!
//! Every parallel loop in the crate funnels through [`map_indexed`], so the
//! `parallel` feature is a one-line decision per call site and the
//! sequential twins stay available in every build for benchmarking.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for the shared map helpers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Use the worker pool when the `parallel` feature is enabled.
    Auto,
    /// Plain iteration regardless of features.
    Seq,
}

/// Map `f` over `0..n` and collect in index order.
pub fn map_indexed<T, F>(mode: Mode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        Mode::Auto => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
        Mode::Seq => (0..n).map(f).collect(),
    }
}

/// Set the worker-pool width. Call once, before any parallel work; later
/// calls are ignored. No-op in builds without the `parallel` feature.
pub fn configure_jobs(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = map_indexed(Mode::Auto, 100, |i| i * i);
        let b = map_indexed(Mode::Seq, 100, |i| i * i);
        assert_eq!(a, b);
    }
}
