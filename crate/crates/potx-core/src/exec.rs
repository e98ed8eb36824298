//! Execution helpers that switch between data-parallel and sequential
//! strategies depending on the `parallel` feature.
//!
//! Every helper preserves input order and accumulates floating point in a
//! fixed association order, so results are byte-identical with and without
//! the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Work items per accumulation chunk. Fixed so that the floating-point
/// association order does not depend on the execution strategy.
const CHUNK: usize = 1 << 12;

/// Applies `f` to every item, preserving input order in the output.
#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Applies `f` to every item, preserving input order in the output.
#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    F: Fn(I) -> T,
{
    items.into_iter().map(f).collect()
}

/// Evaluates `f(0..n)`, each call yielding a bucket index and a weight,
/// and sums the weights per bucket.
///
/// Weights are summed inside fixed-size chunks first and the chunk totals
/// are added in chunk order, so the result does not depend on whether the
/// chunks ran in parallel.
pub(crate) fn accumulate_indexed<F>(n: usize, buckets: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> (usize, f64) + Sync + Send,
{
    let chunk_starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
    let chunk_sums = map_ordered(chunk_starts, |start| {
        let mut local = vec![0.0_f64; buckets];
        for i in start..(start + CHUNK).min(n) {
            let (bucket, weight) = f(i);
            local[bucket] += weight;
        }
        local
    });
    let mut total = vec![0.0_f64; buckets];
    for chunk in chunk_sums {
        for (slot, sum) in total.iter_mut().zip(chunk) {
            *slot += sum;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_ordered_preserves_order() {
        let doubled = map_ordered((0..100).collect::<Vec<i32>>(), |x| x * 2);
        assert_eq!(doubled, (0..100).map(|x| x * 2).collect::<Vec<i32>>());
    }

    #[test]
    fn accumulate_spans_chunk_boundaries() {
        // 10_000 items straddle three chunks of 4096.
        let sums = accumulate_indexed(10_000, 2, |i| (i % 2, 1.0));
        assert_eq!(sums, vec![5_000.0, 5_000.0]);
    }

    #[test]
    fn accumulate_handles_empty_input() {
        assert_eq!(accumulate_indexed(0, 3, |_| (0, 1.0)), vec![0.0, 0.0, 0.0]);
    }
}
