//! Batch execution: rayon when the `parallel` feature is enabled, plain
//! iterators otherwise. Callers pick a [`Mode`] so that benchmarks can compare
//! both paths inside one binary.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    /// Falls back to [`Mode::Sequential`] without the `parallel` feature.
    #[default]
    Parallel,
}

impl Mode {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Mode::Parallel
    }
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..count`.
pub fn map_range<R, F>(mode: Mode, count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..count).map(f).collect()
}

/// True if `pred` holds for some index in `0..count`.
pub fn any_index<F>(mode: Mode, count: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().any(pred);
    }
    let _ = mode;
    (0..count).any(pred)
}

/// Maximum of `f` over `0..count` (0 for an empty range).
pub fn max_range<F>(mode: Mode, count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).reduce(|| 0.0, f64::max);
    }
    let _ = mode;
    (0..count).map(f).fold(0.0, f64::max)
}

/// Caps the global rayon pool. Returns false if the pool was already built
/// (or the crate was compiled without rayon).
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let a = map(Mode::Sequential, &items, |x| x * x);
        let b = map(Mode::Parallel, &items, |x| x * x);
        assert_eq!(a, b);
        assert!(any_index(Mode::Parallel, 100, |i| i == 77));
        assert!(!any_index(Mode::Sequential, 100, |i| i == 177));
        assert_eq!(max_range(Mode::Parallel, 10, |i| i as f64), 9.0);
    }
}
