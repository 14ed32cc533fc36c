//! Named predictive systems and the tau policy.

use std::fmt;
use std::str::FromStr;

use crate::band::PredictiveBand;
use crate::conformity::Metric;
use crate::error::{Error, Result};
use crate::observation::{extend_all, Observation};
use crate::stream::RandomStream;
use crate::transducers::{dh_band, hcps_band_extended, hmps_band, nn_band_extended, pfs_distribution, venn_envelope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemId {
    /// Dempster-Hill: conformal, trivial measure.
    Dh,
    /// Conformal, nearest-neighbour measure.
    Nn,
    /// Mondrian, trivial measure, histogram taxonomy.
    HistMondrian,
    /// Conformal, histogram measure.
    HistConformal,
    /// Empirical distribution within the histogram cell.
    Pfs,
    /// Venn predictor with the histogram taxonomy.
    Venn,
}

impl SystemId {
    pub const ALL: [SystemId; 6] = [
        SystemId::Dh,
        SystemId::Nn,
        SystemId::HistMondrian,
        SystemId::HistConformal,
        SystemId::Pfs,
        SystemId::Venn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::Dh => "dh",
            SystemId::Nn => "nn",
            SystemId::HistMondrian => "hist-mondrian",
            SystemId::HistConformal => "hist-conformal",
            SystemId::Pfs => "pfs",
            SystemId::Venn => "venn",
        }
    }

    /// Conformal transducers (the online validity property holds for these).
    pub fn is_conformal(self) -> bool {
        matches!(self, SystemId::Dh | SystemId::Nn | SystemId::HistConformal)
    }

    /// Randomized predictive systems: probabilistically calibrated at every `n`.
    pub fn is_randomized(self) -> bool {
        self.is_conformal() || self == SystemId::HistMondrian
    }

    pub fn needs_scalar_predictors(self) -> bool {
        matches!(self, SystemId::HistMondrian | SystemId::HistConformal | SystemId::Pfs | SystemId::Venn)
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SystemId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown system '{s}'")))
    }
}

/// How the final random number `tau` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TauPolicy {
    #[default]
    Random,
    Fixed(f64),
}

impl TauPolicy {
    /// Always consumes one draw so stream positions do not depend on the policy.
    pub fn draw(self, stream: &mut RandomStream) -> f64 {
        let u = stream.uniform();
        match self {
            TauPolicy::Random => u,
            TauPolicy::Fixed(v) => v,
        }
    }
}

impl FromStr for TauPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "random" {
            return Ok(TauPolicy::Random);
        }
        let v = s
            .strip_prefix("fixed:")
            .ok_or_else(|| Error::Configuration(format!("tau policy must be 'random' or 'fixed:v', got '{s}'")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Configuration(format!("cannot parse tau value '{v}'")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("tau {v} outside [0, 1]")));
        }
        Ok(TauPolicy::Fixed(v))
    }
}

impl fmt::Display for TauPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauPolicy::Random => f.write_str("random"),
            TauPolicy::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

fn scalar(x: &[f64]) -> Result<f64> {
    match x {
        [v] => Ok(*v),
        _ => Err(Error::UnsupportedPredictor { dim: x.len() }),
    }
}

/// Band produced by `system` for test predictor `x`, given tie-breaking
/// numbers for the training data and for the test point. For `venn` this
/// is the envelope of the Venn family.
pub fn predictive_band(
    system: SystemId,
    training: &[Observation],
    thetas: &[f64],
    x: &[f64],
    theta: f64,
) -> Result<PredictiveBand> {
    if training.is_empty() {
        return Err(Error::Precondition("training data must be non-empty".into()));
    }
    if let Some(d) = crate::observation::common_dim(training)? {
        if d != x.len() {
            return Err(Error::Precondition(format!(
                "test predictor has dimension {}, training data {d}",
                x.len()
            )));
        }
    }
    match system {
        SystemId::Dh => dh_band(&training.iter().map(|z| z.y).collect::<Vec<_>>()),
        SystemId::Nn => nn_band_extended(&extend_all(training, thetas)?, x, theta, Metric::Euclidean),
        SystemId::HistMondrian => hmps_band(training, scalar(x)?),
        SystemId::HistConformal => hcps_band_extended(&extend_all(training, thetas)?, scalar(x)?, theta),
        SystemId::Pfs => pfs_distribution(training, scalar(x)?),
        SystemId::Venn => venn_envelope(training, scalar(x)?),
    }
}

/// [`predictive_band`] with `theta_1 .. theta_{n+1}` drawn from `stream`.
pub fn predictive_band_seeded(
    system: SystemId,
    training: &[Observation],
    x: &[f64],
    stream: &mut RandomStream,
) -> Result<PredictiveBand> {
    let thetas: Vec<f64> = (0..training.len()).map(|_| stream.uniform()).collect();
    let theta = stream.uniform();
    predictive_band(system, training, &thetas, x, theta)
}
