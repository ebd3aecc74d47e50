//! Data-parallel helpers with a sequential fallback.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f` over every item, preserving order.
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// `f` over every item, stopping early on the first error.
pub fn try_map<T: Sync, R: Send, E: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<R, E> + Sync + Send,
) -> Result<Vec<R>, E> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// True iff `f` holds for every item. Stops at the first `false` or error.
pub fn try_all<T: Sync, E: Send>(items: &[T], f: impl Fn(&T) -> Result<bool, E> + Sync + Send) -> Result<bool, E> {
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .map(|t| match f(t) {
                Ok(true) => Ok(()),
                Ok(false) => Err(None),
                Err(e) => Err(Some(e)),
            })
            .collect::<Result<(), Option<E>>>()
            .map_or_else(|e| e.map_or(Ok(false), Err), |_| Ok(true))
    }
    #[cfg(not(feature = "parallel"))]
    {
        for t in items {
            if !f(t)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
