//! Order-preserving parallel map over replication indices.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f(0..n)` on `workers` threads (0 picks the machine default)
/// and returns results in index order, so output never depends on scheduling.
pub fn par_map<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = par_map(1, 100, |i| i * i).unwrap();
        let b = par_map(4, 100, |i| i * i).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
    }
}
