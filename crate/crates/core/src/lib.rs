//! Randomized predictive systems.
//!
//! `cpskit` builds predictive distributions for a real response from
//! training observations `(x, y)`: conformal predictive systems
//! (Dempster-Hill, nearest neighbour, histogram), the histogram Mondrian
//! predictive system, a plain probability forecasting system and Venn
//! predictors. Each randomized predictive distribution is represented as a
//! [`PredictiveBand`] holding `Q(y, 0)` and `Q(y, 1)`.
//!
//! The [`harness`] module runs the Monte-Carlo experiments that check
//! calibration and consistency, and reproduces two exact counterexamples to
//! marginal calibration.
//!
//! ```
//! use cpskit::{dh_band, Observation, hmps_band};
//!
//! let band = dh_band(&[1.0, 3.0]).unwrap();
//! assert_eq!(band.bounds(2.0).unwrap(), (1.0 / 3.0, 2.0 / 3.0));
//!
//! let training: Vec<_> = (0..8)
//!     .map(|i| Observation::scalar(i as f64 / 8.0, i as f64).unwrap())
//!     .collect();
//! let band = hmps_band(&training, 0.3).unwrap();
//! assert_eq!(band.evaluate(-1.0, 0.0).unwrap(), 0.0);
//! ```

pub mod band;
pub mod conformity;
pub mod error;
pub mod harness;
pub mod observation;
pub mod stream;
pub mod system;
pub mod transducers;

pub use band::PredictiveBand;
pub use conformity::{
    check_monotonic, check_permutation_invariance, histogram_score, nn_score, trivial_score, ConformityMeasure,
    HistogramRank, Metric, NearestNeighbour, Trivial,
};
pub use error::{Error, Result};
pub use observation::{ExtendedObservation, Observation};
pub use stream::{derive_stream, RandomStream};
pub use system::{predictive_band, predictive_band_seeded, SystemId, TauPolicy};
pub use transducers::{
    conformal_pvalue, dh_band, h_schedule, hcps_band, histogram_taxonomy, hmps_band, mondrian_pvalue, nn_band,
    pfs_distribution, venn_distribution, HistogramTaxonomy, Taxonomy,
};
