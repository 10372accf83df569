//! Data-parallel map over independent work items.
//!
//! With the `parallel` feature the items run on the rayon pool unless the
//! caller asks for serial execution; without it everything is sequential.
//! Results always come back in index order, so output does not depend on
//! scheduling.

pub fn map_indexed<T, F>(count: usize, serial: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !serial {
            use rayon::prelude::*;
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    let _ = serial;
    (0..count).map(f).collect()
}

pub fn num_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
