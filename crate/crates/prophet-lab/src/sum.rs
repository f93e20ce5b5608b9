//! Compensated and pairwise summation.
//!
//! Every expectation in this crate is a dot product of probabilities with
//! values, and every Monte Carlo merge is a reduction over per-trajectory
//! payoffs. Both must be deterministic and accurate, so they go through the
//! helpers here instead of a bare `.sum()`.

/// Size below which pairwise summation falls back to a compensated scan.
const PAIRWISE_LEAF: usize = 64;

/// Neumaier variant of Kahan summation.
///
/// Keeps a running compensation term so that adding values of wildly
/// different magnitude loses at most one ulp overall instead of one per add.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in iter {
        acc.add(v);
    }
    acc.value()
}

/// Compensated dot product Σ aᵢ·bᵢ.
pub fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

/// Pairwise (cascade) summation over a slice.
///
/// The reduction tree depends only on the slice length, so the result is
/// identical no matter how the values were produced — this is what makes
/// parallel Monte Carlo merges reproduce the sequential result bit for bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_LEAF {
        return compensated_sum(values.iter().copied());
    }
    let mid = values.len() / 2;
    let (lo, hi) = values.split_at(mid);
    pairwise_sum(lo) + pairwise_sum(hi)
}
