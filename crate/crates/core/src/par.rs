//! Execution policy for the data-parallel kernels.
//!
//! With the `parallel` feature the kernels fan out over rayon's global
//! pool; without it every policy runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Requested execution strategy for a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Parallel only when compiled in and when the job is big enough to pay
    /// for the fork.
    pub fn for_work(self, work: usize) -> Exec {
        const MIN_PARALLEL_WORK: usize = 16_384;
        if work < MIN_PARALLEL_WORK {
            Exec::Sequential
        } else {
            self
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// `(0..n).map(f).collect()` under the given policy.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// `items.iter().map(f).collect()` under the given policy.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let seq = map_range(Exec::Sequential, 1000, |i| i * i);
        let par = map_range(Exec::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert_eq!(
            map_slice(Exec::Sequential, &xs, |x| x.sqrt()),
            map_slice(Exec::Parallel, &xs, |x| x.sqrt())
        );
    }

    #[test]
    fn small_work_stays_sequential() {
        assert_eq!(Exec::Parallel.for_work(10), Exec::Sequential);
    }
}
