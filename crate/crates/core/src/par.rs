//! Data-parallel map helpers. With the `parallel` feature (default) these
//! fan out over rayon's pool; without it they run sequentially, so the two
//! builds are directly comparable in the benches.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub(crate) fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    F: Fn(&T) -> Result<U>,
{
    items.iter().map(f).collect()
}
