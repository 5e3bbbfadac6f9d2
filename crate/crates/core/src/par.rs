//! Index-parallel map helpers.
//!
//! With the `parallel` feature these fan out over rayon's pool; without it
//! they run on the calling thread. Results are always returned in index
//! order, so downstream reductions see the same sequence either way.

use crate::Result;

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }

    pub fn init_threads(threads: usize) -> bool {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }

    pub fn current_threads() -> usize {
        rayon::current_num_threads()
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }

    pub fn init_threads(_threads: usize) -> bool {
        false
    }

    pub fn current_threads() -> usize {
        1
    }
}

/// Evaluates `f(0), …, f(n-1)` and returns them in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    imp::map_range(n, f)
}

/// Fallible variant of [`map_range`]; the reported error is the one with the
/// lowest index, independent of scheduling.
pub fn try_map_range<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    imp::map_range(n, f).into_iter().collect()
}

/// Caps the global worker pool. Returns `false` if the pool was already
/// initialised or the crate was built without the `parallel` feature.
pub fn init_threads(threads: usize) -> bool {
    imp::init_threads(threads)
}

pub fn current_threads() -> usize {
    imp::current_threads()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn map_preserves_index_order() {
        let v = map_range(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>> = try_map_range(100, |i| {
            if i % 30 == 29 {
                Err(Error::invalid(format!("{i}")))
            } else {
                Ok(i)
            }
        });
        assert_eq!(r.unwrap_err(), Error::invalid("29"));
    }
}
