//! Conformity measures and checkers for their defining properties.
//!
//! All measures act on extended observations `(x, y, theta)`. Measures that
//! do not need a tie-breaking number ignore `theta`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::observation::{ExtendedObservation, Observation};
use crate::stream::RandomStream;
use crate::transducers::HistogramPartition;

/// Score of how large `candidate.y` is relative to the comparison data.
/// Implementations must not depend on the order of `data`.
pub trait ConformityMeasure: Send + Sync {
    fn score(&self, data: &[ExtendedObservation], candidate: &ExtendedObservation) -> Result<f64>;
}

impl<M: ConformityMeasure + ?Sized> ConformityMeasure for &M {
    fn score(&self, data: &[ExtendedObservation], candidate: &ExtendedObservation) -> Result<f64> {
        (**self).score(data, candidate)
    }
}

/// `A(z_1, ..., z_n, z_{n+1}) = y_{n+1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trivial;

impl ConformityMeasure for Trivial {
    fn score(&self, _data: &[ExtendedObservation], candidate: &ExtendedObservation) -> Result<f64> {
        Ok(candidate.y())
    }
}

pub fn trivial_score(_data: &[Observation], candidate: &Observation) -> f64 {
    candidate.y
}

/// Distance on predictor vectors. Only the ordering of distances matters,
/// so Euclidean distances are compared through their squares.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    /// A monotone transform of the distance between `a` and `b`.
    pub fn rank_distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum(),
            Metric::Manhattan => a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum(),
        }
    }
}

/// Canonical order among equidistant neighbours: response, then predictor,
/// then tie-breaking number.
pub(crate) fn neighbour_order(a: &ExtendedObservation, b: &ExtendedObservation) -> Ordering {
    a.y()
        .total_cmp(&b.y())
        .then_with(|| {
            a.x().iter()
                .zip(b.x())
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| a.theta.total_cmp(&b.theta))
}

/// Picks one element of a tie set: sorted canonically, index `floor(theta * k)`.
pub(crate) fn pick_tied(mut ties: Vec<&ExtendedObservation>, theta: f64) -> &ExtendedObservation {
    debug_assert!(!ties.is_empty());
    ties.sort_by(|a, b| neighbour_order(a, b));
    let k = ties.len();
    let idx = ((theta * k as f64) as usize).min(k - 1);
    ties[idx]
}

/// Nearest neighbour of `x` among `data`, ties broken uniformly by `theta`.
pub fn select_neighbour<'a>(
    data: &'a [ExtendedObservation],
    x: &[f64],
    theta: f64,
    metric: Metric,
) -> Result<&'a ExtendedObservation> {
    if data.is_empty() {
        return Err(Error::Precondition("nearest neighbour of an empty set".into()));
    }
    let dists: Vec<f64> = data.iter().map(|z| metric.rank_distance(z.x(), x)).collect();
    let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let ties = data.iter().zip(&dists).filter(|(_, &d)| d == best).map(|(z, _)| z).collect();
    Ok(pick_tied(ties, theta))
}

/// `A = y_{n+1} - y_j` with `x_j` a nearest neighbour of `x_{n+1}`; the
/// candidate's `theta` picks uniformly among equidistant neighbours.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestNeighbour {
    pub metric: Metric,
}

impl ConformityMeasure for NearestNeighbour {
    fn score(&self, data: &[ExtendedObservation], candidate: &ExtendedObservation) -> Result<f64> {
        let nn = select_neighbour(data, candidate.x(), candidate.theta, self.metric)?;
        Ok(candidate.y() - nn.y())
    }
}

/// Nearest-neighbour residual with the tie-break drawn from `stream`.
/// Consumes exactly one uniform.
pub fn nn_score(data: &[Observation], candidate: &Observation, stream: &mut RandomStream) -> Result<f64> {
    let theta = stream.uniform();
    if data.is_empty() {
        return Err(Error::Precondition("nearest-neighbour score needs comparison data".into()));
    }
    let ext: Vec<ExtendedObservation> = data
        .iter()
        .map(|o| ExtendedObservation { obs: o.clone(), theta: 0.0 })
        .collect();
    let cand = ExtendedObservation { obs: candidate.clone(), theta };
    NearestNeighbour::default().score(&ext, &cand)
}

/// Rank of `(y, theta)` among the comparison observations sharing the
/// candidate's histogram cell, divided by their number. Scalar predictors only.
pub fn histogram_score(
    data: &[ExtendedObservation],
    candidate: &ExtendedObservation,
    n_for_partition: usize,
) -> Result<f64> {
    let x = candidate.obs.scalar_x()?;
    let partition = HistogramPartition::for_size(n_for_partition)?;
    let cell = partition.cell(x);
    let mut in_cell = 0usize;
    let mut below = 0usize;
    for z in data {
        if partition.cell(z.obs.scalar_x()?) == cell {
            in_cell += 1;
            if z.key_le(candidate.y(), candidate.theta) {
                below += 1;
            }
        }
    }
    if in_cell == 0 {
        return Ok(if candidate.y() >= 0.0 { 1.0 } else { 0.0 });
    }
    Ok(below as f64 / in_cell as f64)
}

/// [`histogram_score`] with the partition fixed by the comparison data size.
#[derive(Debug, Clone, Copy, Default)]
pub struct HistogramRank;

impl ConformityMeasure for HistogramRank {
    fn score(&self, data: &[ExtendedObservation], candidate: &ExtendedObservation) -> Result<f64> {
        if data.is_empty() {
            candidate.obs.scalar_x()?;
            return Ok(if candidate.y() >= 0.0 { 1.0 } else { 0.0 });
        }
        histogram_score(data, candidate, data.len())
    }
}

/// Scores the candidate under `trials` random permutations of `data` and
/// reports whether all agree with the unpermuted score (tolerance 1e-12).
pub fn check_permutation_invariance<M: ConformityMeasure + ?Sized>(
    measure: &M,
    data: &[ExtendedObservation],
    candidate: &ExtendedObservation,
    trials: usize,
    stream: &mut RandomStream,
) -> Result<bool> {
    if trials == 0 {
        return Err(Error::Precondition("at least one permutation trial required".into()));
    }
    let reference = measure.score(data, candidate)?;
    let mut shuffled = data.to_vec();
    for _ in 0..trials {
        stream.shuffle(&mut shuffled);
        let s = measure.score(&shuffled, candidate)?;
        if (s - reference).abs() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sweeps `y_grid` through the candidate response (score must not decrease)
/// and through the first comparison response (score must not increase).
pub fn check_monotonic<M: ConformityMeasure + ?Sized>(
    measure: &M,
    data: &[ExtendedObservation],
    candidate: &ExtendedObservation,
    y_grid: &[f64],
) -> Result<bool> {
    if y_grid.is_empty() {
        return Err(Error::Precondition("empty y grid".into()));
    }
    if y_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("y grid must be sorted".into()));
    }

    let mut cand = candidate.clone();
    let mut prev = f64::NEG_INFINITY;
    for &y in y_grid {
        cand.obs.y = y;
        let s = measure.score(data, &cand)?;
        if s < prev {
            return Ok(false);
        }
        prev = s;
    }

    if data.is_empty() {
        return Ok(true);
    }
    let mut perturbed = data.to_vec();
    let mut prev = f64::INFINITY;
    for &y in y_grid {
        perturbed[0].obs.y = y;
        let s = measure.score(&perturbed, candidate)?;
        if s > prev {
            return Ok(false);
        }
        prev = s;
    }
    Ok(true)
}
