//! Conformal, Mondrian and Venn transducers and the predictive bands built
//! from them.

mod closed_form;
mod histogram;
mod nearest;
mod taxonomy;
mod transducer;

pub use closed_form::{dh_band, hmps_band, pfs_distribution, venn_distribution, venn_envelope};
pub use histogram::{hcps_band, hcps_band_extended, HistogramConformal};
pub use nearest::{nn_band, nn_band_extended, NeighbourTable, NnLayout};
pub use taxonomy::{h_schedule, histogram_taxonomy, HistogramPartition, HistogramTaxonomy, SingleClass, Taxonomy};
pub use transducer::{candidate_class, conformal_pvalue, conformity_score, mondrian_pvalue};
