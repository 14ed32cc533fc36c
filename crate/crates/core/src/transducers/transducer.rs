//! Conformal and Mondrian transducers evaluated straight from their
//! definitions. `O(n^2)` score evaluations per query; the closed-form
//! bands elsewhere in this module are checked against these.

use crate::conformity::ConformityMeasure;
use crate::error::{Error, Result};
use crate::observation::{ExtendedObservation, Observation};
use crate::transducers::taxonomy::Taxonomy;

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau {tau} outside [0, 1]")))
    }
}

/// Conformity score of index `i` (0-based; `i == n` is the candidate):
/// observation `i` is scored against the rest of the augmented sequence.
pub fn conformity_score<M: ConformityMeasure + ?Sized>(
    measure: &M,
    training: &[ExtendedObservation],
    candidate: &ExtendedObservation,
    i: usize,
) -> Result<f64> {
    let n = training.len();
    if i == n {
        return measure.score(training, candidate);
    }
    let mut comparison = Vec::with_capacity(n);
    comparison.extend_from_slice(&training[..i]);
    comparison.extend_from_slice(&training[i + 1..]);
    comparison.push(candidate.clone());
    measure.score(&comparison, &training[i])
}

fn pvalue_over<M: ConformityMeasure + ?Sized>(
    measure: &M,
    training: &[ExtendedObservation],
    candidate: &ExtendedObservation,
    tau: f64,
    class: &[usize],
) -> Result<f64> {
    let n = training.len();
    let target = conformity_score(measure, training, candidate, n)?;
    let mut below = 0usize;
    let mut equal = 0usize;
    for &i in class {
        let a = if i == n {
            target
        } else {
            conformity_score(measure, training, candidate, i)?
        };
        if a < target {
            below += 1;
        } else if a == target {
            equal += 1;
        }
    }
    let size = class.len() as f64;
    Ok(below as f64 / size + tau * equal as f64 / size)
}

/// Randomized conformal p-value of the candidate `(x, y, theta)`.
pub fn conformal_pvalue<M: ConformityMeasure + ?Sized>(
    measure: &M,
    training: &[ExtendedObservation],
    candidate: &ExtendedObservation,
    tau: f64,
) -> Result<f64> {
    check_tau(tau)?;
    if training.is_empty() {
        return Err(Error::Precondition("conformal transducer needs n >= 1".into()));
    }
    let all: Vec<usize> = (0..=training.len()).collect();
    pvalue_over(measure, training, candidate, tau, &all)
}

/// Indices (0-based, `n` is the candidate) equivalent to the candidate.
pub fn candidate_class<T: Taxonomy + ?Sized>(
    taxonomy: &T,
    training: &[Observation],
    candidate: &Observation,
) -> Result<Vec<usize>> {
    let mut seq = training.to_vec();
    seq.push(candidate.clone());
    let labels = taxonomy.labels(&seq)?;
    if labels.len() != seq.len() {
        return Err(Error::Configuration("taxonomy returned the wrong number of labels".into()));
    }
    let own = labels[training.len()];
    Ok(labels.iter().enumerate().filter(|(_, &l)| l == own).map(|(i, _)| i).collect())
}

/// Randomized Mondrian p-value: the conformal p-value restricted to the
/// candidate's equivalence class.
pub fn mondrian_pvalue<T: Taxonomy + ?Sized, M: ConformityMeasure + ?Sized>(
    taxonomy: &T,
    measure: &M,
    training: &[ExtendedObservation],
    candidate: &ExtendedObservation,
    tau: f64,
) -> Result<f64> {
    check_tau(tau)?;
    if training.is_empty() {
        return Err(Error::Precondition("Mondrian transducer needs n >= 1".into()));
    }
    let plain: Vec<Observation> = training.iter().map(|z| z.obs.clone()).collect();
    let class = candidate_class(taxonomy, &plain, &candidate.obs)?;
    pvalue_over(measure, training, candidate, tau, &class)
}
