//! Nearest-neighbour conformal predictive system.
//!
//! For each training index `i`, the comparison data used to score `z_i`
//! is the rest of the training set plus the test point. Its nearest
//! neighbour is either a training point (score independent of the postulated
//! response `y`), the test point alone (`i` in the set `I`, score `y_i - y`),
//! or a tie between both, resolved by `theta_i`.

use crate::band::PredictiveBand;
use crate::conformity::{pick_tied, select_neighbour, Metric};
use crate::error::{Error, Result};
use crate::observation::{ExtendedObservation, Observation};
use crate::stream::RandomStream;

/// Nearest training neighbours of each training point.
#[derive(Debug, Clone)]
pub struct NeighbourTable {
    metric: Metric,
    best: Vec<f64>,
    argmin: Vec<Vec<usize>>,
}

impl NeighbourTable {
    pub fn new(metric: Metric) -> Self {
        Self {
            metric,
            best: Vec::new(),
            argmin: Vec::new(),
        }
    }

    pub fn build(training: &[ExtendedObservation], metric: Metric) -> Self {
        let mut table = Self::new(metric);
        for m in 0..training.len() {
            table.push(&training[..=m]);
        }
        table
    }

    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }

    /// Registers `training.last()`; earlier entries must already be in the table.
    pub fn push(&mut self, training: &[ExtendedObservation]) {
        let m = training.len() - 1;
        assert_eq!(m, self.len(), "table out of sync with training data");
        let xm = training[m].x();
        let mut own_best = f64::INFINITY;
        let mut own_arg = Vec::new();
        for (i, z) in training[..m].iter().enumerate() {
            let d = self.metric.rank_distance(z.x(), xm);
            if d < self.best[i] {
                self.best[i] = d;
                self.argmin[i].clear();
                self.argmin[i].push(m);
            } else if d == self.best[i] {
                self.argmin[i].push(m);
            }
            if d < own_best {
                own_best = d;
                own_arg.clear();
                own_arg.push(i);
            } else if d == own_best {
                own_arg.push(i);
            }
        }
        self.best.push(own_best);
        self.argmin.push(own_arg);
    }
}

#[derive(Debug, Clone)]
enum Term {
    /// Nearest neighbour is a training point with this response.
    Fixed(f64),
    /// Nearest neighbour is the test point.
    Test,
    /// Test point ties with these training indices.
    Tied(Vec<usize>),
}

/// Everything about the nearest-neighbour scores that does not depend on
/// the postulated response.
#[derive(Debug, Clone)]
pub struct NnLayout<'a> {
    training: &'a [ExtendedObservation],
    x: Vec<f64>,
    theta: f64,
    y_hat: f64,
    terms: Vec<Term>,
}

impl<'a> NnLayout<'a> {
    pub fn new(
        training: &'a [ExtendedObservation],
        table: &NeighbourTable,
        x: &[f64],
        theta: f64,
    ) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::Precondition("nearest-neighbour band needs n >= 1".into()));
        }
        if table.len() != training.len() {
            return Err(Error::Precondition("neighbour table does not match training data".into()));
        }
        if x.len() != training[0].x().len() {
            return Err(Error::Precondition(format!(
                "test predictor has dimension {}, training data {}",
                x.len(),
                training[0].x().len()
            )));
        }
        let metric = table.metric;
        let y_hat = select_neighbour(training, x, theta, metric)?.y();
        let terms = training
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let t = metric.rank_distance(x, z.x());
                let d = table.best[i];
                if t < d {
                    Term::Test
                } else if t > d {
                    let ties = table.argmin[i].iter().map(|&j| &training[j]).collect();
                    Term::Fixed(pick_tied(ties, z.theta).y())
                } else {
                    Term::Tied(table.argmin[i].clone())
                }
            })
            .collect();
        Ok(Self {
            training,
            x: x.to_vec(),
            theta,
            y_hat,
            terms,
        })
    }

    /// Prediction `y_hat` for the test point.
    pub fn y_hat(&self) -> f64 {
        self.y_hat
    }

    /// Training indices whose nearest neighbour is the test point alone.
    pub fn test_neighbours(&self) -> Vec<usize> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, Term::Test))
            .map(|(i, _)| i)
            .collect()
    }

    fn score(&self, i: usize, y: f64) -> f64 {
        let z = &self.training[i];
        match &self.terms[i] {
            Term::Fixed(yh) => z.y() - yh,
            Term::Test => z.y() - y,
            Term::Tied(others) => {
                let test = ExtendedObservation {
                    obs: Observation { x: self.x.clone(), y },
                    theta: self.theta,
                };
                let mut ties: Vec<&ExtendedObservation> = others.iter().map(|&j| &self.training[j]).collect();
                ties.push(&test);
                z.y() - pick_tied(ties, z.theta).y()
            }
        }
    }

    /// Conformal p-value at postulated response `y`.
    pub fn pvalue(&self, y: f64, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Domain(format!("tau {tau} outside [0, 1]")));
        }
        let target = y - self.y_hat;
        let mut below = 0usize;
        let mut equal = 1usize;
        for i in 0..self.training.len() {
            let a = self.score(i, y);
            if a < target {
                below += 1;
            } else if a == target {
                equal += 1;
            }
        }
        let d = (self.training.len() + 1) as f64;
        Ok(below as f64 / d + tau * equal as f64 / d)
    }

    /// Values of `y` at which `alpha_i = alpha_{n+1}`, or where a tied
    /// neighbour selection can switch.
    fn critical_points(&self) -> (Vec<f64>, bool) {
        let mut pts = Vec::with_capacity(self.terms.len());
        let mut simple = true;
        for (i, term) in self.terms.iter().enumerate() {
            let yi = self.training[i].y();
            match term {
                Term::Test => pts.push((self.y_hat + yi) / 2.0),
                Term::Fixed(yh) => pts.push(self.y_hat + (yi - yh)),
                Term::Tied(others) => {
                    simple = false;
                    pts.push((self.y_hat + yi) / 2.0);
                    for &j in others {
                        let yj = self.training[j].y();
                        pts.push(self.y_hat + (yi - yj));
                        pts.push(yj);
                    }
                }
            }
        }
        (pts, simple)
    }

    /// Predictive band. Distinct critical points give the closed form;
    /// collisions or ties fall back to pointwise evaluation.
    pub fn band(&self) -> Result<PredictiveBand> {
        let (mut pts, simple) = self.critical_points();
        if pts.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite critical point".into()));
        }
        pts.sort_by(f64::total_cmp);
        let distinct = pts.windows(2).all(|w| w[0] < w[1]);
        if !(simple && distinct) {
            return PredictiveBand::from_evaluator(&pts, |y, tau| self.pvalue(y, tau));
        }
        let n = pts.len();
        let d = (n + 1) as f64;
        let lower = (0..=n).map(|i| i as f64 / d).collect();
        let upper = (0..=n).map(|i| (i + 1) as f64 / d).collect();
        let at_lo = (1..=n).map(|i| (i - 1) as f64 / d).collect();
        let at_hi = (1..=n).map(|i| (i + 1) as f64 / d).collect();
        PredictiveBand::new(pts, lower, upper, at_lo, at_hi)
    }
}

/// Nearest-neighbour band for extended training data and test `(x, theta)`.
pub fn nn_band_extended(
    training: &[ExtendedObservation],
    x: &[f64],
    theta: f64,
    metric: Metric,
) -> Result<PredictiveBand> {
    let table = NeighbourTable::build(training, metric);
    NnLayout::new(training, &table, x, theta)?.band()
}

/// Nearest-neighbour band with tie-breaking numbers `theta_1 .. theta_{n+1}`
/// drawn from `stream` in index order.
pub fn nn_band(training: &[Observation], x: &[f64], stream: &mut RandomStream) -> Result<PredictiveBand> {
    if training.is_empty() {
        return Err(Error::Precondition("nearest-neighbour band needs n >= 1".into()));
    }
    let thetas: Vec<f64> = (0..training.len()).map(|_| stream.uniform()).collect();
    let theta = stream.uniform();
    let ext = crate::observation::extend_all(training, &thetas)?;
    nn_band_extended(&ext, x, theta, Metric::Euclidean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformity::NearestNeighbour;
    use crate::stream::derive_stream;
    use crate::transducers::transducer::conformal_pvalue;

    fn ext(x: f64, y: f64, theta: f64) -> ExtendedObservation {
        Observation::scalar(x, y).unwrap().extend(theta).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn two_point_example() {
        let tr = vec![ext(0.0, 0.0, 0.5), ext(10.0, 1.0, 0.5)];
        let table = NeighbourTable::build(&tr, Metric::Euclidean);
        let layout = NnLayout::new(&tr, &table, &[0.1], 0.5).unwrap();
        assert_eq!(layout.y_hat(), 0.0);
        assert_eq!(layout.test_neighbours(), vec![0, 1]);
        let b = layout.band().unwrap();
        assert_eq!(b.jumps(), &[0.0, 0.5]);
        let (lo, hi) = b.bounds(0.25).unwrap();
        assert!(close(lo, 1.0 / 3.0) && close(hi, 2.0 / 3.0));
        // brute force through the generic transducer on a grid
        for k in -20..=20 {
            let y = k as f64 * 0.0625 + 0.01;
            for tau in [0.0, 1.0] {
                let c = ext(0.1, y, 0.5);
                let direct = conformal_pvalue(&NearestNeighbour::default(), &tr, &c, tau).unwrap();
                assert!(close(direct, b.evaluate(y, tau).unwrap()));
            }
        }
    }

    #[test]
    fn single_point_example() {
        let tr = vec![ext(0.0, 5.0, 0.5)];
        let b = nn_band_extended(&tr, &[0.0], 0.5, Metric::Euclidean).unwrap();
        assert_eq!(b.jumps(), &[5.0]);
        let (lo, hi) = b.bounds(4.0).unwrap();
        assert!(close(lo, 0.0) && close(hi, 0.5));
        let (lo, hi) = b.bounds(6.0).unwrap();
        assert!(close(lo, 0.5) && close(hi, 1.0));
    }

    #[test]
    fn empty_training_is_rejected() {
        let mut s = derive_stream(0, &[]);
        assert!(nn_band(&[], &[0.0], &mut s).is_err());
    }

    #[test]
    fn identical_predictors_match_transducer() {
        // every distance ties, so every score goes through the tie path
        let ys = [0.3, -1.2, 2.5, 0.9, 1.7];
        for t in 0..1000u64 {
            let mut s = derive_stream(17, &[t]);
            let tr: Vec<_> = ys.iter().map(|&y| ext(1.0, y, s.uniform())).collect();
            let theta = s.uniform();
            let b = nn_band_extended(&tr, &[1.0], theta, Metric::Euclidean).unwrap();
            b.check().unwrap();
            let y = s.uniform() * 8.0 - 4.0;
            let tau = s.uniform();
            let c = ext(1.0, y, theta);
            let direct = conformal_pvalue(&NearestNeighbour::default(), &tr, &c, tau).unwrap();
            assert!(close(direct, b.evaluate(y, tau).unwrap()), "trial {t}");
        }
    }

    #[test]
    fn incremental_table_matches_batch() {
        let mut s = derive_stream(8, &[]);
        let tr: Vec<_> = (0..40).map(|_| ext((s.uniform() * 8.0).floor(), s.uniform(), s.uniform())).collect();
        let batch = NeighbourTable::build(&tr, Metric::Euclidean);
        let mut inc = NeighbourTable::new(Metric::Euclidean);
        for m in 0..tr.len() {
            inc.push(&tr[..=m]);
        }
        assert_eq!(batch.best, inc.best);
        assert_eq!(batch.argmin, inc.argmin);
    }
}
