use crate::error::Result;
use crate::scalar::Real;

use super::{HMatrix, Node};

/// Per-block dynamic ranges with a one-decade histogram.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DynamicRangeStats {
    /// `log10(max |a| / min |a|)` over nonzero entries, one per stored block.
    pub samples: Vec<f64>,
    /// `histogram[b]` counts samples in `[b, b + 1)` decades.
    pub histogram: Vec<usize>,
}

impl DynamicRangeStats {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let mut histogram = Vec::new();
        for &s in &samples {
            let b = s.max(0.0).floor() as usize;
            if histogram.len() <= b {
                histogram.resize(b + 1, 0);
            }
            histogram[b] += 1;
        }
        Self { samples, histogram }
    }

    /// Fraction of blocks with range at most `decades`.
    pub fn fraction_within(&self, decades: f64) -> f64 {
        if self.samples.is_empty() {
            return 1.0;
        }
        self.samples.iter().filter(|&&s| s <= decades).count() as f64 / self.samples.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}

/// `log10` of the ratio of largest to smallest nonzero magnitude; 0 if all
/// entries are zero.
pub fn dynamic_range<T: Real>(values: impl IntoIterator<Item = T>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in values {
        let a = v.as_f64().abs();
        if a > 0.0 {
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    if hi == 0.0 {
        0.0
    } else {
        (hi / lo).log10()
    }
}

impl<T: Real> HMatrix<T> {
    /// One sample per dense block and per lowrank factor.
    pub fn dynamic_range_stats(&self) -> Result<DynamicRangeStats> {
        let mut samples = Vec::new();
        for leaf in self.leaves() {
            let (m, n) = (leaf.nrows(), leaf.ncols());
            match leaf.node() {
                Node::Dense(d) => samples.push(dynamic_range(d.matrix(m, n)?.iter().copied())),
                Node::Lowrank(lr) if lr.rank() > 0 => {
                    let f = lr.factors(m, n)?;
                    samples.push(dynamic_range(f.u.iter().copied()));
                    samples.push(dynamic_range(f.v.iter().copied()));
                }
                _ => {}
            }
        }
        Ok(DynamicRangeStats::from_samples(samples))
    }
}
