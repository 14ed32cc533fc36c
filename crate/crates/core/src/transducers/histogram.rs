//! Histogram conformal predictive system.
//!
//! Scores of training points outside the test cell do not depend on the
//! postulated response, so they are computed once and kept sorted; only
//! the test cell is rescanned per query.

use std::collections::HashMap;

use crate::band::PredictiveBand;
use crate::error::{Error, Result};
use crate::observation::{extend_all, ExtendedObservation, Observation};
use crate::stream::RandomStream;
use crate::transducers::taxonomy::HistogramPartition;

#[derive(Debug, Clone)]
pub struct HistogramConformal<'a> {
    training: &'a [ExtendedObservation],
    theta: f64,
    /// Test-cell members: (index, count of other members with key <= own key).
    cell_members: Vec<(usize, usize)>,
    /// Sorted scores of every training point outside the test cell.
    outside: Vec<f64>,
}

impl<'a> HistogramConformal<'a> {
    pub fn new(training: &'a [ExtendedObservation], x: f64, theta: f64) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::Precondition("histogram conformal band needs n >= 1".into()));
        }
        if !x.is_finite() {
            return Err(Error::Numeric("test predictor must be finite".into()));
        }
        let p = HistogramPartition::for_size(training.len())?;
        let test_cell = p.cell(x);

        let mut cells: HashMap<i64, Vec<usize>> = HashMap::new();
        for (i, z) in training.iter().enumerate() {
            cells.entry(p.cell(z.obs.scalar_x()?)).or_default().push(i);
        }

        let mut cell_members = Vec::new();
        let mut outside = Vec::with_capacity(training.len());
        for (cell, members) in &cells {
            let mut sorted = members.clone();
            sorted.sort_by(|&a, &b| {
                let (za, zb) = (&training[a], &training[b]);
                za.y().total_cmp(&zb.y()).then(za.theta.total_cmp(&zb.theta))
            });
            // count of other members whose key is <= own key
            let mut le_others = vec![0usize; sorted.len()];
            let mut k = 0;
            while k < sorted.len() {
                let mut end = k + 1;
                while end < sorted.len() && {
                    let (a, b) = (&training[sorted[k]], &training[sorted[end]]);
                    a.y() == b.y() && a.theta == b.theta
                } {
                    end += 1;
                }
                for slot in le_others.iter_mut().take(end).skip(k) {
                    *slot = end - 1;
                }
                k = end;
            }
            if *cell == test_cell {
                cell_members.extend(sorted.iter().copied().zip(le_others));
            } else {
                let others = sorted.len() - 1;
                for (pos, &i) in sorted.iter().enumerate() {
                    let s = if others == 0 {
                        if training[i].y() >= 0.0 { 1.0 } else { 0.0 }
                    } else {
                        le_others[pos] as f64 / others as f64
                    };
                    outside.push(s);
                }
            }
        }
        outside.sort_by(f64::total_cmp);
        cell_members.sort_unstable();
        Ok(Self {
            training,
            theta,
            cell_members,
            outside,
        })
    }

    /// Number of training predictors in the test cell.
    pub fn cell_size(&self) -> usize {
        self.cell_members.len()
    }

    /// Distinct in-cell responses (plus 0 for an empty cell); the band is
    /// constant between consecutive ones.
    pub fn critical_points(&self) -> Vec<f64> {
        if self.cell_members.is_empty() {
            return vec![0.0];
        }
        let mut pts: Vec<f64> = self.cell_members.iter().map(|&(i, _)| self.training[i].y()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn pvalue(&self, y: f64, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Domain(format!("tau {tau} outside [0, 1]")));
        }
        let big_n = self.cell_members.len();
        let target = if big_n == 0 {
            if y >= 0.0 { 1.0 } else { 0.0 }
        } else {
            let a = self
                .cell_members
                .iter()
                .filter(|&&(i, _)| self.training[i].key_le(y, self.theta))
                .count();
            a as f64 / big_n as f64
        };

        let mut below = self.outside.partition_point(|&s| s < target);
        let mut equal = self.outside.partition_point(|&s| s <= target) - below + 1;
        for &(i, le) in &self.cell_members {
            let z = &self.training[i];
            let test_le = y < z.y() || (y == z.y() && self.theta <= z.theta);
            let s = (le + usize::from(test_le)) as f64 / big_n as f64;
            if s < target {
                below += 1;
            } else if s == target {
                equal += 1;
            }
        }
        let d = (self.training.len() + 1) as f64;
        Ok(below as f64 / d + tau * equal as f64 / d)
    }

    pub fn band(&self) -> Result<PredictiveBand> {
        PredictiveBand::from_evaluator(&self.critical_points(), |y, tau| self.pvalue(y, tau))
    }
}

/// Histogram conformal band for extended training data and test `(x, theta)`.
pub fn hcps_band_extended(training: &[ExtendedObservation], x: f64, theta: f64) -> Result<PredictiveBand> {
    HistogramConformal::new(training, x, theta)?.band()
}

/// Histogram conformal band with `theta_1 .. theta_{n+1}` drawn from
/// `stream` in index order.
pub fn hcps_band(training: &[Observation], x: f64, stream: &mut RandomStream) -> Result<PredictiveBand> {
    if training.is_empty() {
        return Err(Error::Precondition("histogram conformal band needs n >= 1".into()));
    }
    let thetas: Vec<f64> = (0..training.len()).map(|_| stream.uniform()).collect();
    let theta = stream.uniform();
    hcps_band_extended(&extend_all(training, &thetas)?, x, theta)
}
