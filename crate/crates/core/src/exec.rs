//! Block-parallel folds over index ranges.
//!
//! All reductions used by the crate are exact (integer addition, logical
//! AND, maximum) so the result never depends on how ranges are split.

use core::ops::Range;

/// Default number of indices per work block.
pub const BLOCK: u64 = 1 << 14;

/// Splits `0..total` into blocks, maps each block and reduces the results.
pub fn fold_blocks<T, M, R>(total: u64, block: u64, identity: T, map: M, reduce: R) -> T
where
    T: Send + Sync + Clone,
    M: Fn(Range<u64>) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    let block = block.max(1);
    let blocks = total.div_ceil(block);
    let range_of = move |b: u64| (b * block)..((b + 1) * block).min(total);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..blocks).into_par_iter().map(|b| map(range_of(b))).reduce(|| identity.clone(), &reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..blocks).map(|b| map(range_of(b))).fold(identity, reduce)
    }
}

/// Elementwise sum of two equal-length count vectors.
pub(crate) fn add_counts(mut a: alloc::vec::Vec<u64>, b: alloc::vec::Vec<u64>) -> alloc::vec::Vec<u64> {
    if a.is_empty() {
        return b;
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Maps every index in `0..len` and collects the results in order.
pub fn map_collect<T, M>(len: usize, map: M) -> alloc::vec::Vec<T>
where
    T: Send,
    M: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(map).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(map).collect()
    }
}
