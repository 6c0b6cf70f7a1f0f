//! Compensated summation with a fixed reduction tree.
//!
//! Every reduction splits its index range into blocks of [`BLOCK`] items,
//! sums each block with Neumaier's algorithm, then folds the block partials
//! left to right. The block boundaries never depend on the thread count, so
//! the result is bitwise identical whether the blocks run on one worker or
//! many.

use rayon::prelude::*;

pub const BLOCK: usize = 8192;

/// Below this many items the blocks are evaluated on the calling thread.
pub const PARALLEL_THRESHOLD: usize = 1 << 15;

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `Σ_{k < len} term(k)` with the fixed block tree described above.
pub fn block_sum<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = len.div_ceil(BLOCK);
    let block = |b: usize| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(len);
        (lo..hi).map(&term).collect::<NeumaierSum>().value()
    };
    let partials: Vec<f64> = if len >= PARALLEL_THRESHOLD {
        (0..blocks).into_par_iter().map(block).collect()
    } else {
        (0..blocks).map(block).collect()
    };
    partials.into_iter().collect::<NeumaierSum>().value()
}

pub fn sum(values: &[f64]) -> f64 {
    block_sum(values.len(), |k| values[k])
}

/// `Σ |a_k − b_k|`.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    block_sum(a.len(), |k| (a[k] - b[k]).abs())
}
