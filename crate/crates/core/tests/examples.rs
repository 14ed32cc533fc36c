use cpskit::harness::{ks_uniform, Sampler};
use cpskit::transducers::{
    candidate_class, hcps_band_extended, nn_band_extended, venn_envelope, HistogramPartition, SingleClass,
};
use cpskit::{
    check_monotonic, check_permutation_invariance, conformal_pvalue, derive_stream, dh_band, h_schedule,
    histogram_score, histogram_taxonomy, hmps_band, mondrian_pvalue, nn_score, pfs_distribution, predictive_band,
    trivial_score, venn_distribution, Error, ExtendedObservation, HistogramTaxonomy, Metric, NearestNeighbour,
    Observation, PredictiveBand, SystemId, Trivial,
};

fn obs(x: f64, y: f64) -> Observation {
    Observation::scalar(x, y).unwrap()
}

fn ext(x: f64, y: f64, theta: f64) -> ExtendedObservation {
    obs(x, y).extend(theta).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn band_evaluation() {
    let b = dh_band(&[1.0, 3.0]).unwrap();
    assert!(close(b.evaluate(2.0, 0.5).unwrap(), 0.5));
    assert_eq!(b.evaluate(-10.0, 0.0).unwrap(), 0.0);
    assert!(close(b.evaluate(1.0, 1.0).unwrap(), 2.0 / 3.0));
    assert!(matches!(b.evaluate(1.0, 1.5), Err(Error::Domain(_))));
}

#[test]
fn band_slack() {
    let b = dh_band(&[1.0, 3.0]).unwrap();
    assert!(close(b.slack(2.0).unwrap(), 1.0 / 3.0));
    assert!(close(b.slack(3.0).unwrap(), 2.0 / 3.0));
    let pfs = pfs_distribution(&[obs(0.1, 2.0), obs(0.2, 5.0)], 0.3).unwrap();
    for y in [0.0, 2.0, 3.0, 5.0, 6.0] {
        assert_eq!(pfs.slack(y).unwrap(), 0.0);
    }
}

#[test]
fn band_integration() {
    // n = 8, h = 1/2: cell [0, 0.5) holds responses 2 and 5
    let mut tr = vec![obs(0.1, 2.0), obs(0.2, 5.0)];
    tr.extend((0..6).map(|i| obs(0.6 + i as f64 * 0.05, -7.0)));
    let b = hmps_band(&tr, 0.3).unwrap();
    for tau in [0.0, 0.3, 1.0] {
        assert!(close(b.integrate(|y| y, tau).unwrap(), 7.0 / 3.0));
    }
    let pfs = pfs_distribution(&tr, 0.3).unwrap();
    assert!(close(pfs.integrate(|_| 1.0, 0.4).unwrap(), 1.0));
    let dh = dh_band(&[1.0, 3.0]).unwrap();
    assert!(close(dh.integrate(|y| y * y, 0.5).unwrap(), 10.0 / 3.0));
    assert!(matches!(dh.integrate(|_| f64::NAN, 0.5), Err(Error::Numeric(_))));
}

#[test]
fn band_json_schema() {
    let b = dh_band(&[1.0, 3.0]).unwrap();
    let v: serde_json::Value = serde_json::to_value(&b).unwrap();
    for key in ["jumps", "lower", "upper", "at_jump_lower", "at_jump_upper"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let back: PredictiveBand = serde_json::from_value(v).unwrap();
    assert_eq!(back, b);
    let bad = r#"{"jumps":[1.0],"lower":[0.5,1.0],"upper":[0.5,1.0],"at_jump_lower":[0.5],"at_jump_upper":[0.5]}"#;
    assert!(serde_json::from_str::<PredictiveBand>(bad).is_err());
}

#[test]
fn streams() {
    let mut a = derive_stream(7, &[3]);
    let mut b = derive_stream(7, &[3]);
    let mut c = derive_stream(7, &[4]);
    let xs: Vec<f64> = (0..10).map(|_| a.uniform()).collect();
    let ys: Vec<f64> = (0..10).map(|_| b.uniform()).collect();
    let zs: Vec<f64> = (0..10).map(|_| c.uniform()).collect();
    assert_eq!(xs, ys);
    assert_ne!(xs, zs);
    let mut s = derive_stream(1, &[]);
    let u: Vec<f64> = (0..10_000).map(|_| s.uniform()).collect();
    assert!(ks_uniform(&u).unwrap() < 0.0163);
}

#[test]
fn conformity_scores() {
    let data = vec![obs(0.0, 1.0), obs(2.0, -3.0)];
    assert_eq!(trivial_score(&data, &obs(5.0, 7.0)), 7.0);
    let mut s = derive_stream(2, &[]);
    let d = vec![obs(0.0, 0.0), obs(10.0, 1.0)];
    assert!(close(nn_score(&d, &obs(0.1, 0.4), &mut s).unwrap(), 0.4));

    // n = 8 gives h = 1/2
    let mut cell = vec![ext(0.1, 2.0, 0.3), ext(0.2, 5.0, 0.8)];
    cell.extend((0..6).map(|i| ext(0.7 + i as f64 * 0.01, 0.0, 0.5)));
    assert!(close(histogram_score(&cell, &ext(0.3, 3.0, 0.5), 8).unwrap(), 0.5));
    assert_eq!(histogram_score(&cell, &ext(0.3, 5.0, 0.8), 8).unwrap(), 1.0);
    assert_eq!(histogram_score(&cell[2..], &ext(0.3, -1.0, 0.5), 8).unwrap(), 0.0);
}

#[test]
fn measure_checkers() {
    let data: Vec<_> = (0..6).map(|i| ext(i as f64 / 6.0, i as f64 % 3.0, 0.1 * i as f64)).collect();
    let cand = ext(0.4, 1.0, 0.5);
    let grid: Vec<f64> = (-8..=8).map(|k| k as f64 / 2.0).collect();
    let mut s = derive_stream(3, &[]);
    assert!(check_permutation_invariance(&Trivial, &data, &cand, 20, &mut s).unwrap());
    assert!(check_permutation_invariance(&NearestNeighbour::default(), &data, &cand, 20, &mut s).unwrap());
    assert!(check_monotonic(&NearestNeighbour::default(), &data, &cand, &grid).unwrap());
}

#[test]
fn schedule_and_taxonomy() {
    assert_eq!(h_schedule(1).unwrap(), 1.0);
    assert_eq!(h_schedule(8).unwrap(), 0.5);
    assert_eq!(h_schedule(512).unwrap(), 0.125);
    let labels = histogram_taxonomy(&[0.3, 0.4, 0.5, 0.9, 0.1, 0.2, 0.6, 0.7, 0.8]).unwrap();
    assert_eq!(labels[0], labels[1]);
    assert_ne!(labels[1], labels[2]);
    let p = HistogramPartition::for_size(8).unwrap();
    assert_eq!(p.cell_bounds(p.cell(0.5)), (0.5, 1.0));
}

#[test]
fn transducers() {
    let tr = vec![ext(0.0, 1.0, 0.5), ext(0.0, 3.0, 0.5)];
    let p = |y: f64, tau: f64| conformal_pvalue(&Trivial, &tr, &ext(0.0, y, 0.5), tau).unwrap();
    assert!(close(p(2.0, 0.0), 1.0 / 3.0));
    assert_eq!(p(0.0, 0.0), 0.0);
    assert!(close(p(1.0, 1.0), 2.0 / 3.0));

    // n = 2 observations, h = 1; put one in another cell by using x = 1.5
    let tr = vec![ext(0.1, 2.0, 0.5), ext(0.2, 5.0, 0.5), ext(1.5, 9.0, 0.5)];
    let obs_tr: Vec<Observation> = tr.iter().map(|z| z.obs.clone()).collect();
    let m = |y: f64, tau: f64| mondrian_pvalue(&HistogramTaxonomy, &Trivial, &tr, &ext(0.3, y, 0.5), tau).unwrap();
    assert!(close(m(3.0, 0.0), 1.0 / 3.0));
    assert!(close(m(3.0, 1.0), 2.0 / 3.0));
    let lone = |tau| mondrian_pvalue(&HistogramTaxonomy, &Trivial, &tr, &ext(7.5, 0.0, 0.5), tau).unwrap();
    assert_eq!((lone(0.0), lone(1.0)), (0.0, 1.0));
    let single = mondrian_pvalue(&SingleClass, &Trivial, &tr, &ext(0.3, 3.0, 0.5), 0.4).unwrap();
    assert!(close(single, conformal_pvalue(&Trivial, &tr, &ext(0.3, 3.0, 0.5), 0.4).unwrap()));
    assert_eq!(candidate_class(&HistogramTaxonomy, &obs_tr, &obs(0.3, 0.0)).unwrap(), vec![0, 1, 3]);
}

#[test]
fn closed_form_bands() {
    let b = dh_band(&[1.0, 3.0]).unwrap();
    let (lo, hi) = b.bounds(2.0).unwrap();
    assert!(close(lo, 1.0 / 3.0) && close(hi, 2.0 / 3.0));
    let (lo, hi) = b.bounds(1.0).unwrap();
    assert!(close(lo, 0.0) && close(hi, 2.0 / 3.0));
    let (lo, hi) = b.bounds(0.0).unwrap();
    assert!(close(lo, 0.0) && close(hi, 1.0 / 3.0));

    let nn = nn_band_extended(&[ext(0.0, 0.0, 0.5), ext(10.0, 1.0, 0.5)], &[0.1], 0.5, Metric::Euclidean).unwrap();
    assert_eq!(nn.jumps(), &[0.0, 0.5]);
    let single = nn_band_extended(&[ext(0.0, 5.0, 0.5)], &[0.0], 0.5, Metric::Euclidean).unwrap();
    assert_eq!(single.bounds(4.0).unwrap(), (0.0, 0.5));

    let hm = hmps_band(&[obs(0.1, 2.0), obs(0.2, 5.0), obs(1.5, 9.0)], 0.3).unwrap();
    let (lo, hi) = hm.bounds(3.0).unwrap();
    assert!(close(lo, 1.0 / 3.0) && close(hi, 2.0 / 3.0));
    let empty = hmps_band(&[obs(0.1, 2.0)], 5.0).unwrap();
    assert_eq!(empty.bounds(123.0).unwrap(), (0.0, 1.0));

    let hc = hcps_band_extended(&[ext(0.0, 4.0, 0.5)], 0.5, 0.5).unwrap();
    assert_eq!(hc.evaluate(10.0, 1.0).unwrap(), 1.0);
}

#[test]
fn pfs_examples() {
    let tr = [obs(0.1, 2.0), obs(0.2, 5.0), obs(1.5, 9.0)];
    assert!(close(pfs_distribution(&tr, 0.3).unwrap().evaluate(3.0, 0.5).unwrap(), 0.5));
    let empty = pfs_distribution(&tr, 7.0).unwrap();
    assert_eq!(empty.evaluate(0.0, 0.2).unwrap(), 1.0);
    assert_eq!(empty.evaluate(-0.1, 0.9).unwrap(), 0.0);
    let tr = [obs(0.1, 2.0), obs(0.2, 2.0), obs(0.3, 5.0)];
    assert!(close(pfs_distribution(&tr, 0.3).unwrap().evaluate(2.0, 0.0).unwrap(), 2.0 / 3.0));
}

#[test]
fn venn_examples() {
    let tr = [obs(0.1, 0.0), obs(0.2, 1.0), obs(1.5, 1.0)];
    let q = |u, y| venn_distribution(&HistogramTaxonomy, &tr, &[0.3], u, y).unwrap();
    assert!(close(q(0.0, 0.5), 2.0 / 3.0));
    assert!(close(q(1.0, 0.5), 1.0 / 3.0));
    assert_eq!(q(1.0, 1.0), 1.0);
    let env = venn_envelope(&tr, 0.3).unwrap();
    let (lo, hi) = env.bounds(0.5).unwrap();
    assert!(close(lo, 1.0 / 3.0) && close(hi, 2.0 / 3.0));
}

#[test]
fn system_dispatch() {
    let mut s = derive_stream(4, &[]);
    let tr = Sampler::P1.draw_n(40, &mut s);
    let thetas: Vec<f64> = (0..40).map(|_| s.uniform()).collect();
    for system in SystemId::ALL {
        let b = predictive_band(system, &tr, &thetas, &[0.4], 0.5).unwrap();
        b.check().unwrap();
    }
    let two_d = vec![Observation::new(vec![0.0, 1.0], 1.0).unwrap()];
    assert!(matches!(
        predictive_band(SystemId::HistMondrian, &two_d, &[0.5], &[0.0, 1.0], 0.5),
        Err(Error::UnsupportedPredictor { dim: 2 })
    ));
    assert!(predictive_band(SystemId::Nn, &two_d, &[0.5], &[0.0, 1.0], 0.5).is_ok());
    assert!(predictive_band(SystemId::Dh, &[], &[], &[0.0], 0.5).is_err());
}
