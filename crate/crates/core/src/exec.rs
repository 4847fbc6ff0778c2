//! Tiny dispatch layer between the rayon-backed and the sequential code
//! paths.  With the `parallel` feature (the default) index maps fan out over
//! the rayon pool; without it they run inline.  Results come back in index
//! order either way, so everything downstream is deterministic.

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Always-sequential twin of [`map_indices`]; the benchmark suite uses it to
/// compare both paths inside a single build.
pub(crate) fn map_indices_serial<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
