//! Dyadic histogram partitions and taxonomies.

use crate::error::{Error, Result};
use crate::observation::Observation;

/// Cell width for training size `n`: `2^(-floor(log2(n) / 3))`.
///
/// Powers of two, non-increasing in `n`, tending to zero while `n * h_n`
/// grows like `n^(2/3)`.
pub fn h_schedule(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("h_schedule needs n >= 1".into()));
    }
    let log2 = usize::BITS - 1 - n.leading_zeros();
    Ok((-((log2 / 3) as f64)).exp2())
}

/// Partition of the real line into cells `[k h, (k + 1) h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramPartition {
    n: usize,
    h: f64,
}

impl HistogramPartition {
    pub fn for_size(n: usize) -> Result<Self> {
        Ok(Self { n, h: h_schedule(n)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> f64 {
        self.h
    }

    /// Index `k` of the cell `[k h, (k + 1) h)` containing `x`.
    #[inline]
    pub fn cell(&self, x: f64) -> i64 {
        (x / self.h).floor() as i64
    }

    pub fn cell_bounds(&self, k: i64) -> (f64, f64) {
        (k as f64 * self.h, (k + 1) as f64 * self.h)
    }
}

/// Assigns an equivalence relation to a sequence of `n + 1` observations,
/// encoded as one label per index (equal labels mean equivalent).
pub trait Taxonomy: Send + Sync {
    fn labels(&self, seq: &[Observation]) -> Result<Vec<i64>>;
}

/// Indices are equivalent when their predictors share a cell of the
/// partition for training size `n = len - 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HistogramTaxonomy;

impl Taxonomy for HistogramTaxonomy {
    fn labels(&self, seq: &[Observation]) -> Result<Vec<i64>> {
        let xs = seq.iter().map(Observation::scalar_x).collect::<Result<Vec<_>>>()?;
        histogram_taxonomy(&xs)
    }
}

/// Every index in one class; the Mondrian transducer then reduces to the
/// conformal one.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingleClass;

impl Taxonomy for SingleClass {
    fn labels(&self, seq: &[Observation]) -> Result<Vec<i64>> {
        Ok(vec![0; seq.len()])
    }
}

/// Cell labels of `n + 1` scalar predictors under the partition for `n`.
pub fn histogram_taxonomy(xs: &[f64]) -> Result<Vec<i64>> {
    if xs.len() < 2 {
        return Err(Error::Precondition("histogram taxonomy needs n + 1 >= 2 predictors".into()));
    }
    let p = HistogramPartition::for_size(xs.len() - 1)?;
    Ok(xs.iter().map(|&x| p.cell(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        assert_eq!(h_schedule(1).unwrap(), 1.0);
        assert_eq!(h_schedule(7).unwrap(), 1.0);
        assert_eq!(h_schedule(8).unwrap(), 0.5);
        assert_eq!(h_schedule(512).unwrap(), 0.125);
        assert!(h_schedule(0).is_err());
    }

    #[test]
    fn schedule_is_nested_and_shrinking() {
        let mut prev = h_schedule(1).unwrap();
        for n in 2..100_000usize {
            let h = h_schedule(n).unwrap();
            assert!(h <= prev);
            // powers of two: coarser width is an integer multiple
            assert_eq!((prev / h).fract(), 0.0);
            assert_eq!(h.log2().fract(), 0.0);
            prev = h;
        }
        assert!(h_schedule(1 << 30).unwrap() * ((1u64 << 30) as f64) > 1e5);
    }

    #[test]
    fn taxonomy_examples() {
        // n = 8 -> h = 1/2
        let xs = [0.3, 0.4, 0.5, 0.99, 1.0, -0.1, 2.0, 3.0, 4.0];
        let labels = histogram_taxonomy(&xs).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_ne!(labels[1], labels[2]);
        assert_eq!(labels[2], labels[3]);
        assert_eq!(labels[2], 1);
        assert_eq!(labels[5], -1);
    }

    #[test]
    fn taxonomy_is_equivariant() {
        let xs = [0.3, 0.4, 0.5, 0.99, 1.0, -0.1, 2.0, 3.0, 4.0];
        let labels = histogram_taxonomy(&xs).unwrap();
        let perm = [8, 3, 1, 0, 6, 2, 7, 5, 4];
        let permuted: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
        let plabels = histogram_taxonomy(&permuted).unwrap();
        for (j, &i) in perm.iter().enumerate() {
            assert_eq!(plabels[j], labels[i]);
        }
    }

    #[test]
    fn taxonomy_ignores_responses() {
        let a = [Observation::scalar(0.2, 1.0).unwrap(), Observation::scalar(0.7, 2.0).unwrap()];
        let b = [Observation::scalar(0.2, -9.0).unwrap(), Observation::scalar(0.7, 40.0).unwrap()];
        assert_eq!(HistogramTaxonomy.labels(&a).unwrap(), HistogramTaxonomy.labels(&b).unwrap());
        let wide = [Observation::new(vec![0.0, 1.0], 0.0).unwrap(), Observation::new(vec![0.0, 1.0], 0.0).unwrap()];
        assert!(matches!(HistogramTaxonomy.labels(&wide), Err(Error::UnsupportedPredictor { dim: 2 })));
    }
}
