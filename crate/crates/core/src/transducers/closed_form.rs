//! Bands with closed forms: Dempster-Hill, histogram Mondrian, the
//! probability forecasting system, and Venn predictors.

use crate::band::PredictiveBand;
use crate::error::{Error, Result};
use crate::observation::Observation;
use crate::transducers::taxonomy::{HistogramPartition, Taxonomy};
use crate::transducers::transducer::candidate_class;

/// Distinct sorted values with multiplicities.
fn tally(values: &[f64]) -> Result<Vec<(f64, usize)>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite response".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((last, m)) if *last == v => *m += 1,
            _ => out.push((v, 1)),
        }
    }
    Ok(out)
}

/// `Q_tau(y) = (#{v < y} + tau (#{v = y} + 1)) / (len + 1)`: the conformal
/// band of the trivial measure over `values`.
fn rank_band(values: &[f64]) -> Result<PredictiveBand> {
    let counts = tally(values)?;
    let d = (values.len() + 1) as f64;
    let mut jumps = Vec::with_capacity(counts.len());
    let mut lower = vec![0.0];
    let mut upper = vec![1.0 / d];
    let mut at_lo = Vec::with_capacity(counts.len());
    let mut at_hi = Vec::with_capacity(counts.len());
    let mut below = 0usize;
    for (v, m) in counts {
        jumps.push(v);
        at_lo.push(below as f64 / d);
        at_hi.push((below + m + 1) as f64 / d);
        below += m;
        lower.push(below as f64 / d);
        upper.push((below + 1) as f64 / d);
    }
    PredictiveBand::new(jumps, lower, upper, at_lo, at_hi)
}

/// Dempster-Hill predictive band of the responses.
pub fn dh_band(responses: &[f64]) -> Result<PredictiveBand> {
    if responses.is_empty() {
        return Err(Error::Precondition("Dempster-Hill band needs n >= 1".into()));
    }
    rank_band(responses)
}

fn in_cell_responses(training: &[Observation], x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::Numeric("test predictor must be finite".into()));
    }
    let p = HistogramPartition::for_size(training.len())?;
    let cell = p.cell(x);
    let mut ys = Vec::new();
    for z in training {
        if p.cell(z.scalar_x()?) == cell {
            ys.push(z.y);
        }
    }
    Ok(ys)
}

/// Histogram Mondrian predictive system: trivial measure within the test
/// predictor's cell. An empty cell gives `Q_tau = tau`.
pub fn hmps_band(training: &[Observation], x: f64) -> Result<PredictiveBand> {
    if training.is_empty() {
        return Err(Error::Precondition("histogram Mondrian band needs n >= 1".into()));
    }
    rank_band(&in_cell_responses(training, x)?)
}

/// Empirical distribution function of the in-cell responses, or a point
/// mass at 0 when the cell is empty. `lower == upper`.
pub fn pfs_distribution(training: &[Observation], x: f64) -> Result<PredictiveBand> {
    let ys = if training.is_empty() {
        if !x.is_finite() {
            return Err(Error::Numeric("test predictor must be finite".into()));
        }
        Vec::new()
    } else {
        in_cell_responses(training, x)?
    };
    let (counts, total) = if ys.is_empty() {
        (vec![(0.0, 1)], 1usize)
    } else {
        (tally(&ys)?, ys.len())
    };
    let t = total as f64;
    let mut jumps = Vec::with_capacity(counts.len());
    let mut plateau = vec![0.0];
    let mut below = 0usize;
    for (v, m) in counts {
        jumps.push(v);
        below += m;
        plateau.push(below as f64 / t);
    }
    let at = plateau[1..].to_vec();
    PredictiveBand::new(jumps, plateau.clone(), plateau, at.clone(), at)
}

/// `Q_u(y)`: fraction of the test index's class (computed with postulated
/// response `u`) whose responses are `<= y`, the test index counting with
/// response `u`.
pub fn venn_distribution<T: Taxonomy + ?Sized>(
    taxonomy: &T,
    training: &[Observation],
    x: &[f64],
    u: f64,
    y: f64,
) -> Result<f64> {
    if training.is_empty() {
        return Err(Error::Precondition("Venn predictor needs n >= 1".into()));
    }
    let candidate = Observation::new(x.to_vec(), u)?;
    let class = candidate_class(taxonomy, training, &candidate)?;
    let n = training.len();
    let hits = class
        .iter()
        .filter(|&&i| if i == n { u <= y } else { training[i].y <= y })
        .count();
    Ok(hits as f64 / class.len() as f64)
}

/// Pointwise envelope `[inf_u Q_u(y), sup_u Q_u(y)]` of the Venn predictor
/// under the histogram taxonomy.
pub fn venn_envelope(training: &[Observation], x: f64) -> Result<PredictiveBand> {
    if training.is_empty() {
        return Err(Error::Precondition("Venn predictor needs n >= 1".into()));
    }
    let counts = tally(&in_cell_responses(training, x)?)?;
    let size = (counts.iter().map(|c| c.1).sum::<usize>() + 1) as f64;
    let mut jumps = Vec::with_capacity(counts.len());
    let mut lower = vec![0.0];
    let mut upper = vec![1.0 / size];
    let mut below = 0usize;
    for (v, m) in counts {
        jumps.push(v);
        below += m;
        lower.push(below as f64 / size);
        upper.push((below + 1) as f64 / size);
    }
    let at_lo = lower[1..].to_vec();
    let at_hi = upper[1..].to_vec();
    PredictiveBand::new(jumps, lower, upper, at_lo, at_hi)
}
