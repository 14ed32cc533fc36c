//! Monte-Carlo validity, consistency and calibration experiments.
//!
//! Trial `t` of an experiment with master seed `s` draws everything from
//! the stream at path `[t]` (or `[n, t]` for consistency curves), so
//! results do not depend on how trials are scheduled across threads.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::sampler::{Sampler, TestFunction};
use crate::observation::{ExtendedObservation, Observation};
use crate::stream::derive_stream;
use crate::system::{predictive_band, SystemId, TauPolicy};
use crate::transducers::{candidate_class, HistogramConformal, NeighbourTable, NnLayout, Taxonomy};

/// Outcome of a statistical check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Summary {
    /// Passes when `statistic < threshold`.
    pub fn below(statistic: f64, threshold: f64) -> Self {
        Self {
            statistic,
            threshold,
            pass: statistic < threshold,
        }
    }
}

/// Asymptotic 1% critical value of the one-sample Kolmogorov-Smirnov statistic.
pub fn ks_threshold(m: usize) -> f64 {
    1.628 / (m as f64).sqrt()
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `values` and the uniform distribution on `[0, 1]`.
pub fn ks_uniform(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Precondition("KS statistic of an empty sample".into()));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("value {v} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / m - v).max(v - i as f64 / m))
        .fold(0.0, f64::max))
}

fn check_sizes(n: usize, trials: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::Precondition("training size n must be >= 1".into()));
    }
    if trials < 1 {
        return Err(Error::Precondition("at least one trial required".into()));
    }
    Ok(())
}

/// Probability integral transforms `Q(z_1, ..., z_n, z_{n+1}, tau)` over
/// independent trials.
pub fn pit_sample(
    system: SystemId,
    sampler: Sampler,
    n: usize,
    trials: usize,
    master_seed: u64,
    tau: TauPolicy,
) -> Result<Vec<f64>> {
    check_sizes(n, trials)?;
    if system == SystemId::Venn {
        return Err(Error::Configuration(
            "venn outputs a family of distributions, not a single PIT".into(),
        ));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut s = derive_stream(master_seed, &[t]);
            let mut data = sampler.draw_n(n + 1, &mut s);
            let thetas: Vec<f64> = (0..=n).map(|_| s.uniform()).collect();
            let tau = tau.draw(&mut s);
            let test = data.pop().expect("n + 1 draws");
            let band = predictive_band(system, &data, &thetas[..n], &test.x, thetas[n])?;
            band.evaluate(test.y, tau)
        })
        .collect()
}

/// Probabilistic calibration check: KS distance of [`pit_sample`] against the 1% critical value.
pub fn pit_summary(system: SystemId, sampler: Sampler, n: usize, trials: usize, seed: u64, tau: TauPolicy) -> Result<Summary> {
    let pits = pit_sample(system, sampler, n, trials, seed, tau)?;
    Ok(Summary::below(ks_uniform(&pits)?, ks_threshold(trials)))
}

/// Online protocol: at step `n` predict `z_{n+1}` from `z_1 .. z_n` with a
/// fresh `tau_n`; returns the fraction of steps whose PIT lies in
/// `[epsilon / 2, 1 - epsilon / 2]`.
pub fn online_coverage(system: SystemId, sampler: Sampler, steps: usize, epsilon: f64, seed: u64) -> Result<f64> {
    let pits = online_pits(system, sampler, steps, seed)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let (lo, hi) = (epsilon / 2.0, 1.0 - epsilon / 2.0);
    Ok(pits.iter().filter(|&&p| lo <= p && p <= hi).count() as f64 / steps as f64)
}

/// The PIT sequence of the online protocol. Observation `i` (with its
/// tie-breaking number) comes from stream `[1, i]`, `tau_n` from `[2, n]`.
pub fn online_pits(system: SystemId, sampler: Sampler, steps: usize, seed: u64) -> Result<Vec<f64>> {
    if !system.is_conformal() {
        return Err(Error::Configuration(format!(
            "online validity is only established for conformal systems, not '{system}'"
        )));
    }
    if steps < 1 {
        return Err(Error::Precondition("at least one online step required".into()));
    }
    let data: Vec<ExtendedObservation> = (0..=steps as u64)
        .map(|i| {
            let mut s = derive_stream(seed, &[1, i]);
            let obs = sampler.draw(&mut s);
            let theta = s.uniform();
            ExtendedObservation { obs, theta }
        })
        .collect();
    let taus: Vec<f64> = (1..=steps as u64).map(|n| derive_stream(seed, &[2, n]).uniform()).collect();

    let mut pits = Vec::with_capacity(steps);
    match system {
        SystemId::Dh => {
            let mut sorted: Vec<f64> = Vec::with_capacity(steps + 1);
            for n in 1..=steps {
                let prev = data[n - 1].y();
                let at = sorted.partition_point(|&v| v < prev);
                sorted.insert(at, prev);
                let y = data[n].y();
                let below = sorted.partition_point(|&v| v < y);
                let equal = sorted.partition_point(|&v| v <= y) - below;
                pits.push((below as f64 + taus[n - 1] * (equal + 1) as f64) / (n + 1) as f64);
            }
        }
        SystemId::Nn => {
            let mut table = NeighbourTable::new(crate::conformity::Metric::Euclidean);
            for n in 1..=steps {
                table.push(&data[..n]);
                let test = &data[n];
                let layout = NnLayout::new(&data[..n], &table, test.x(), test.theta)?;
                pits.push(layout.pvalue(test.y(), taus[n - 1])?);
            }
        }
        SystemId::HistConformal => {
            for n in 1..=steps {
                let test = &data[n];
                let hc = HistogramConformal::new(&data[..n], test.obs.scalar_x()?, test.theta)?;
                pits.push(hc.pvalue(test.y(), taus[n - 1])?);
            }
        }
        _ => unreachable!("guarded by is_conformal"),
    }
    Ok(pits)
}

/// Online check: `|coverage - (1 - epsilon)|` against a fixed tolerance.
pub fn online_summary(system: SystemId, sampler: Sampler, steps: usize, epsilon: f64, tolerance: f64, seed: u64) -> Result<Summary> {
    let cov = online_coverage(system, sampler, steps, epsilon, seed)?;
    let dev = (cov - (1.0 - epsilon)).abs();
    Ok(Summary {
        statistic: dev,
        threshold: tolerance,
        pass: dev <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub median: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        (values[m / 2 - 1] + values[m / 2]) / 2.0
    }
}

/// Per-trial `|integral of f dQ_n - E(f | x_{n+1})|` for one training size.
pub fn consistency_discrepancies(
    system: SystemId,
    sampler: Sampler,
    f: &TestFunction,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_sizes(n, trials)?;
    if system == SystemId::Venn {
        return Err(Error::Configuration("venn outputs a family of distributions".into()));
    }
    if sampler.conditional_expectation(f, 0.5).is_none() {
        return Err(Error::Configuration(format!(
            "sampler {sampler} has no conditional-expectation oracle for '{}'",
            f.name
        )));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut s = derive_stream(seed, &[n as u64, t]);
            let mut data = sampler.draw_n(n + 1, &mut s);
            let thetas: Vec<f64> = (0..=n).map(|_| s.uniform()).collect();
            let tau = s.uniform();
            let test = data.pop().expect("n + 1 draws");
            let band = predictive_band(system, &data, &thetas[..n], &test.x, thetas[n])?;
            let integral = band.integrate(|y| f.apply(y), tau)?;
            let truth = sampler
                .conditional_expectation(f, test.x[0])
                .expect("oracle checked above");
            Ok((integral - truth).abs())
        })
        .collect()
}

/// Median discrepancy for each training size in `ns`.
pub fn consistency_curve(
    system: SystemId,
    sampler: Sampler,
    f: &TestFunction,
    ns: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    ns.iter()
        .map(|&n| {
            let mut d = consistency_discrepancies(system, sampler, f, n, trials, seed)?;
            Ok(CurvePoint { n, median: median(&mut d) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VennRow {
    pub y: f64,
    /// Mean of `Q_{y_{n+1}}(y)` over trials.
    pub mean_q: f64,
    /// Frequency of `y_{n+1} <= y`.
    pub freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalRow {
    /// Predicted probability `1 - Q_{y_{n+1}}(0)`.
    pub p: f64,
    pub count: usize,
    /// Frequency of `y_{n+1} = 1` among trials predicting `p`.
    pub freq_one: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VennCalibration {
    pub marginal: Vec<VennRow>,
    /// Empty unless the sampler is binary.
    pub conditional: Vec<ConditionalRow>,
}

/// Monte-Carlo estimate of both sides of marginal calibration for the
/// Venn component `Q_{y_{n+1}}`, plus conditional calibration for binary
/// responses.
pub fn venn_calibration<T: Taxonomy + ?Sized>(
    taxonomy: &T,
    sampler: Sampler,
    n: usize,
    trials: usize,
    y_grid: &[f64],
    seed: u64,
) -> Result<VennCalibration> {
    check_sizes(n, trials)?;
    struct Trial {
        q: Vec<f64>,
        hit: Vec<bool>,
        p: Ratio<i64>,
        one: bool,
    }
    let per_trial: Vec<Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut s = derive_stream(seed, &[t]);
            let mut data = sampler.draw_n(n + 1, &mut s);
            let test = data.pop().expect("n + 1 draws");
            let class = candidate_class(taxonomy, &data, &test)?;
            let response = |i: usize| if i == n { test.y } else { data[i].y };
            let size = class.len();
            let q = y_grid
                .iter()
                .map(|&y| class.iter().filter(|&&i| response(i) <= y).count() as f64 / size as f64)
                .collect();
            let hit = y_grid.iter().map(|&y| test.y <= y).collect();
            let at_zero = class.iter().filter(|&&i| response(i) <= 0.0).count();
            Ok(Trial {
                q,
                hit,
                p: Ratio::new((size - at_zero) as i64, size as i64),
                one: test.y == 1.0,
            })
        })
        .collect::<Result<_>>()?;

    let m = trials as f64;
    let marginal = y_grid
        .iter()
        .enumerate()
        .map(|(k, &y)| VennRow {
            y,
            mean_q: per_trial.iter().map(|t| t.q[k]).sum::<f64>() / m,
            freq: per_trial.iter().filter(|t| t.hit[k]).count() as f64 / m,
        })
        .collect();

    let mut conditional = Vec::new();
    if sampler.is_binary() {
        let mut groups: BTreeMap<Ratio<i64>, (usize, usize)> = BTreeMap::new();
        for t in &per_trial {
            let e = groups.entry(t.p).or_default();
            e.0 += 1;
            e.1 += usize::from(t.one);
        }
        conditional = groups
            .into_iter()
            .map(|(p, (count, ones))| ConditionalRow {
                p: *p.numer() as f64 / *p.denom() as f64,
                count,
                freq_one: ones as f64 / count as f64,
            })
            .collect();
    }
    Ok(VennCalibration { marginal, conditional })
}

/// Writes rows as CSV with a header line.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("n,median_discrepancy\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.n, p.median));
    }
    out
}

pub fn pits_csv(pits: &[f64]) -> String {
    let mut out = String::from("trial,pit\n");
    for (t, p) in pits.iter().enumerate() {
        out.push_str(&format!("{t},{p}\n"));
    }
    out
}

/// Observations drawn by trial `t` of [`pit_sample`], for inspection.
pub fn trial_data(sampler: Sampler, n: usize, seed: u64, t: u64) -> Vec<Observation> {
    let mut s = derive_stream(seed, &[t]);
    sampler.draw_n(n + 1, &mut s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transducers::HistogramTaxonomy;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_uniform(&[0.5]).unwrap(), 0.5);
        let m = 50;
        let grid: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
        assert!((ks_uniform(&grid).unwrap() - 1.0 / m as f64).abs() < 1e-12);
        assert!(matches!(ks_uniform(&[0.2, 1.2]), Err(Error::Domain(_))));
        assert!(ks_uniform(&[]).is_err());
    }

    #[test]
    fn ks_matches_brute_force() {
        // sup over a fine grid of |F_m(t) - t|, including left limits at the sample points
        let vals = [0.13, 0.5, 0.51, 0.9, 0.07, 0.5];
        let m = vals.len() as f64;
        let mut brute: f64 = 0.0;
        for &v in &vals {
            let le = vals.iter().filter(|&&w| w <= v).count() as f64 / m;
            let lt = vals.iter().filter(|&&w| w < v).count() as f64 / m;
            brute = brute.max((le - v).abs()).max((lt - v).abs());
        }
        assert!((brute - ks_uniform(&vals).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn pit_shapes() {
        let p = pit_sample(SystemId::Dh, Sampler::P1, 5, 1, 3, TauPolicy::Random).unwrap();
        assert_eq!(p.len(), 1);
        assert!((0.0..=1.0).contains(&p[0]));
        assert!(pit_sample(SystemId::Venn, Sampler::P1, 5, 1, 3, TauPolicy::Random).is_err());
        assert!(pit_sample(SystemId::Dh, Sampler::P1, 0, 1, 3, TauPolicy::Random).is_err());
    }

    #[test]
    fn pit_is_reproducible() {
        let a = pit_sample(SystemId::HistConformal, Sampler::P2, 10, 200, 9, TauPolicy::Random).unwrap();
        let b = pit_sample(SystemId::HistConformal, Sampler::P2, 10, 200, 9, TauPolicy::Random).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn online_nn_matches_batch_bands() {
        let pits = online_pits(SystemId::Nn, Sampler::P1, 30, 4).unwrap();
        let hc = online_pits(SystemId::HistConformal, Sampler::P1, 30, 4).unwrap();
        let dh = online_pits(SystemId::Dh, Sampler::P1, 30, 4).unwrap();
        for n in 1..=30u64 {
            let data: Vec<ExtendedObservation> = (0..=n)
                .map(|i| {
                    let mut s = derive_stream(4, &[1, i]);
                    let obs = Sampler::P1.draw(&mut s);
                    ExtendedObservation { obs, theta: s.uniform() }
                })
                .collect();
            let tau = derive_stream(4, &[2, n]).uniform();
            let nu = n as usize;
            let training: Vec<Observation> = data[..nu].iter().map(|z| z.obs.clone()).collect();
            let thetas: Vec<f64> = data[..nu].iter().map(|z| z.theta).collect();
            let test = &data[nu];
            for (sys, seq) in [(SystemId::Nn, &pits), (SystemId::HistConformal, &hc), (SystemId::Dh, &dh)] {
                let band = predictive_band(sys, &training, &thetas, test.x(), test.theta).unwrap();
                let q = band.evaluate(test.y(), tau).unwrap();
                assert!((q - seq[nu - 1]).abs() < 1e-12, "{sys} step {n}");
            }
        }
    }

    #[test]
    fn online_edge_cases() {
        assert_eq!(online_coverage(SystemId::Dh, Sampler::P2, 500, 0.0, 1).unwrap(), 1.0);
        assert!(online_coverage(SystemId::Dh, Sampler::P2, 500, 1.0, 1).unwrap() < 0.01);
        assert!(matches!(
            online_coverage(SystemId::HistMondrian, Sampler::P2, 10, 0.1, 1),
            Err(Error::Configuration(_))
        ));
        assert!(online_coverage(SystemId::Dh, Sampler::P2, 10, 1.5, 1).is_err());
    }

    #[test]
    fn consistency_guards_and_bounds() {
        let square = TestFunction::new("square", |y| y * y, 9.0);
        assert!(matches!(
            consistency_curve(SystemId::Dh, Sampler::P2, &square, &[10], 5, 1),
            Err(Error::Configuration(_))
        ));
        let f = TestFunction::cos();
        let d = consistency_discrepancies(SystemId::HistMondrian, Sampler::P1, &f, 50, 100, 2).unwrap();
        assert!(d.iter().all(|&v| v <= 2.0 * f.bound));
        let curve = consistency_curve(SystemId::Pfs, Sampler::P1, &f, &[100], 20, 2).unwrap();
        assert_eq!(curve.len(), 1);
        assert_eq!(curve_csv(&curve).lines().count(), 2);
    }

    #[test]
    fn venn_point_mass() {
        let grid = [-1.0, 1.9999, 2.0, 3.0];
        let v = venn_calibration(&HistogramTaxonomy, Sampler::Constant(2.0), 12, 50, &grid, 3).unwrap();
        for row in &v.marginal {
            let expected = if row.y >= 2.0 { 1.0 } else { 0.0 };
            assert_eq!(row.mean_q, expected);
            assert_eq!(row.freq, expected);
        }
        assert!(v.conditional.is_empty());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
