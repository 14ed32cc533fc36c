//! Observations and extended observations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A predictor vector paired with a real response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Observation {
    /// Creates an observation, rejecting empty or non-finite predictors and
    /// non-finite responses.
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Precondition("predictor must have dimension >= 1".into()));
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("observation values must be finite".into()));
        }
        Ok(Self { x, y })
    }

    /// Shorthand for an observation with a scalar predictor.
    pub fn scalar(x: f64, y: f64) -> Result<Self> {
        Self::new(vec![x], y)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The scalar predictor, or an error when `dim() != 1`.
    pub fn scalar_x(&self) -> Result<f64> {
        match self.x.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::UnsupportedPredictor { dim: self.dim() }),
        }
    }

    pub fn extend(self, theta: f64) -> Result<ExtendedObservation> {
        ExtendedObservation::new(self, theta)
    }
}

/// An observation carrying a tie-breaking number in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedObservation {
    pub obs: Observation,
    pub theta: f64,
}

impl ExtendedObservation {
    pub fn new(obs: Observation, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta {theta} outside [0, 1]")));
        }
        Ok(Self { obs, theta })
    }

    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.obs.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.obs.y
    }

    /// Lexicographic `(y, theta) <= (other.y, other.theta)`.
    #[inline]
    pub fn key_le(&self, y: f64, theta: f64) -> bool {
        self.obs.y < y || (self.obs.y == y && self.theta <= theta)
    }
}

/// Checks that a dataset has a common predictor dimension and returns it.
/// Empty datasets return `None`.
pub fn common_dim(data: &[Observation]) -> Result<Option<usize>> {
    let Some(first) = data.first() else {
        return Ok(None);
    };
    let d = first.dim();
    if let Some(bad) = data.iter().find(|o| o.dim() != d) {
        return Err(Error::Precondition(format!(
            "inconsistent predictor dimension: expected {d}, found {}",
            bad.dim()
        )));
    }
    Ok(Some(d))
}

/// Pairs observations with tie-breaking numbers.
pub fn extend_all(data: &[Observation], thetas: &[f64]) -> Result<Vec<ExtendedObservation>> {
    if data.len() != thetas.len() {
        return Err(Error::Precondition(format!(
            "{} observations but {} tie-breaking numbers",
            data.len(),
            thetas.len()
        )));
    }
    data.iter()
        .zip(thetas)
        .map(|(o, &t)| ExtendedObservation::new(o.clone(), t))
        .collect()
}
