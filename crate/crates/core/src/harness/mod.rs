//! Experiment harness: samplers, Monte-Carlo checks and exact demos.

pub mod appendix;
pub mod experiments;
pub mod sampler;

pub use appendix::{marginal_calibration_exchangeable, marginal_calibration_iid, ExchangeableDemo, IidDemo};
pub use experiments::{
    consistency_curve, consistency_discrepancies, curve_csv, ks_threshold, ks_uniform, online_coverage, online_pits,
    online_summary, pit_sample, pits_csv, pit_summary, venn_calibration, ConditionalRow, CurvePoint, Summary,
    VennCalibration, VennRow,
};
pub use sampler::{Sampler, TestFunction};
