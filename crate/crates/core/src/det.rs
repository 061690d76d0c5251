//! Deterministic parallel reduction.
//!
//! Work is split into chunks whose boundaries depend only on the input size,
//! chunks are mapped in parallel, and the partial results are folded
//! sequentially in index order. The reduction tree is therefore fixed, and
//! floating-point output is bitwise identical for any worker-thread count.

use rayon::prelude::*;
use std::ops::Range;

/// Maps `0..n` chunk-by-chunk in parallel and folds the per-chunk results in
/// index order.
pub fn map_fold<R, E, F>(n: usize, chunk: usize, eval: E, init: R, mut fold: F) -> R
where
    R: Send,
    E: Fn(Range<usize>) -> R + Sync + Send,
    F: FnMut(R, R) -> R,
{
    assert!(chunk > 0, "chunk size must be positive");
    let ranges: Vec<Range<usize>> = (0..n)
        .step_by(chunk)
        .map(|s| s..usize::min(s + chunk, n))
        .collect();
    let parts: Vec<R> = ranges.into_par_iter().map(eval).collect();
    parts.into_iter().fold(init, &mut fold)
}

/// Order-fixed parallel sum of `f(i)` over `0..n`.
pub fn sum_indexed<F>(n: usize, chunk: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    map_fold(
        n,
        chunk,
        |r| {
            let mut acc = 0.0;
            for i in r {
                acc += f(i);
            }
            acc
        },
        0.0,
        |a, b| a + b,
    )
}
