//! Piecewise-constant predictive bands.
//!
//! A [`PredictiveBand`] stores `Q(y, 0)` and `Q(y, 1)` for a randomized
//! predictive distribution: plateau values on the open intervals between
//! consecutive jumps, and separate values at each jump. `Q(y, tau)` for any
//! other `tau` follows by linear interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used by the structural checks.
pub const BAND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BandDocument {
    jumps: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    at_jump_lower: Vec<f64>,
    at_jump_upper: Vec<f64>,
}

/// Lower (`tau = 0`) and upper (`tau = 1`) distribution functions of a
/// randomized predictive distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BandDocument", into = "BandDocument")]
pub struct PredictiveBand {
    jumps: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    at_jump_lower: Vec<f64>,
    at_jump_upper: Vec<f64>,
}

impl TryFrom<BandDocument> for PredictiveBand {
    type Error = Error;

    fn try_from(d: BandDocument) -> Result<Self> {
        PredictiveBand::new(d.jumps, d.lower, d.upper, d.at_jump_lower, d.at_jump_upper)
    }
}

impl From<PredictiveBand> for BandDocument {
    fn from(b: PredictiveBand) -> Self {
        BandDocument {
            jumps: b.jumps,
            lower: b.lower,
            upper: b.upper,
            at_jump_lower: b.at_jump_lower,
            at_jump_upper: b.at_jump_upper,
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau {tau} outside [0, 1]")))
    }
}

#[inline]
fn mix(lo: f64, hi: f64, tau: f64) -> f64 {
    lo + tau * (hi - lo)
}

/// Where `y` falls relative to the jumps.
enum Location {
    Plateau(usize),
    Jump(usize),
}

impl PredictiveBand {
    /// Builds a band and checks every structural invariant.
    pub fn new(
        jumps: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        at_jump_lower: Vec<f64>,
        at_jump_upper: Vec<f64>,
    ) -> Result<Self> {
        let band = Self {
            jumps,
            lower,
            upper,
            at_jump_lower,
            at_jump_upper,
        };
        band.check()?;
        Ok(band)
    }

    /// The band `Q(y, tau) = tau` for every `y`.
    pub fn pure_tie() -> Self {
        Self {
            jumps: vec![],
            lower: vec![0.0],
            upper: vec![1.0],
            at_jump_lower: vec![],
            at_jump_upper: vec![],
        }
    }

    /// Extracts a band from a pointwise evaluator `eval(y, tau)` that is
    /// constant in `y` on every open interval between consecutive
    /// `candidates`. Candidates where nothing changes are dropped.
    pub fn from_evaluator<F>(candidates: &[f64], mut eval: F) -> Result<Self>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let mut pts: Vec<f64> = candidates.to_vec();
        if pts.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite candidate jump".into()));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();

        let mut probes = Vec::with_capacity(pts.len() + 1);
        match (pts.first(), pts.last()) {
            (Some(&first), Some(&last)) => {
                probes.push(first - first.abs().max(1.0));
                for w in pts.windows(2) {
                    probes.push(w[0] + (w[1] - w[0]) / 2.0);
                }
                probes.push(last + last.abs().max(1.0));
            }
            _ => probes.push(0.0),
        }

        let mut lower = Vec::with_capacity(probes.len());
        let mut upper = Vec::with_capacity(probes.len());
        for &p in &probes {
            lower.push(eval(p, 0.0)?);
            upper.push(eval(p, 1.0)?);
        }
        let mut at_lo = Vec::with_capacity(pts.len());
        let mut at_hi = Vec::with_capacity(pts.len());
        for &p in &pts {
            at_lo.push(eval(p, 0.0)?);
            at_hi.push(eval(p, 1.0)?);
        }

        let mut band = Self::new(pts, lower, upper, at_lo, at_hi)?;
        band.drop_inert_jumps();
        Ok(band)
    }

    fn drop_inert_jumps(&mut self) {
        let mut k = 0;
        while k < self.jumps.len() {
            let inert = self.lower[k] == self.lower[k + 1]
                && self.upper[k] == self.upper[k + 1]
                && self.at_jump_lower[k] == self.lower[k]
                && self.at_jump_upper[k] == self.upper[k];
            if inert {
                self.jumps.remove(k);
                self.at_jump_lower.remove(k);
                self.at_jump_upper.remove(k);
                self.lower.remove(k + 1);
                self.upper.remove(k + 1);
            } else {
                k += 1;
            }
        }
    }

    /// Structural checks: values in `[0, 1]`, `lower <= upper`, monotone in `y` for
    /// both `tau = 0` and `tau = 1`, left limit 0 at `tau = 0` and right
    /// limit 1 at `tau = 1`.
    pub fn check(&self) -> Result<()> {
        let m = self.jumps.len();
        if self.lower.len() != m + 1 || self.upper.len() != m + 1 {
            return Err(Error::InvalidBand(format!(
                "{} jumps need {} plateaus, got {}/{}",
                m,
                m + 1,
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.at_jump_lower.len() != m || self.at_jump_upper.len() != m {
            return Err(Error::InvalidBand("one value per jump required".into()));
        }
        if self.jumps.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBand("non-finite jump".into()));
        }
        if self.jumps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBand("jumps must be strictly increasing".into()));
        }
        let all = self
            .lower
            .iter()
            .chain(&self.upper)
            .chain(&self.at_jump_lower)
            .chain(&self.at_jump_upper);
        for &v in all {
            if !(v.is_finite() && (-BAND_TOLERANCE..=1.0 + BAND_TOLERANCE).contains(&v)) {
                return Err(Error::InvalidBand(format!("value {v} outside [0, 1]")));
            }
        }

        let tau0 = self.profile(false);
        let tau1 = self.profile(true);
        for (a, b) in tau0.iter().zip(&tau1) {
            if a > &(b + BAND_TOLERANCE) {
                return Err(Error::InvalidBand(format!("lower {a} exceeds upper {b}")));
            }
        }
        for (name, prof) in [("lower", &tau0), ("upper", &tau1)] {
            if let Some(w) = prof.windows(2).find(|w| w[0] > w[1] + BAND_TOLERANCE) {
                return Err(Error::InvalidBand(format!(
                    "{name} function decreases from {} to {}",
                    w[0], w[1]
                )));
            }
        }
        if self.lower[0].abs() > BAND_TOLERANCE {
            return Err(Error::InvalidBand(format!(
                "left limit at tau = 0 is {} (expected 0)",
                self.lower[0]
            )));
        }
        if (self.upper[m] - 1.0).abs() > BAND_TOLERANCE {
            return Err(Error::InvalidBand(format!(
                "right limit at tau = 1 is {} (expected 1)",
                self.upper[m]
            )));
        }
        Ok(())
    }

    /// Plateau, jump, plateau, ... values in increasing `y` order.
    fn profile(&self, upper: bool) -> Vec<f64> {
        let (plat, at) = if upper {
            (&self.upper, &self.at_jump_upper)
        } else {
            (&self.lower, &self.at_jump_lower)
        };
        let mut out = Vec::with_capacity(plat.len() + at.len());
        for k in 0..at.len() {
            out.push(plat[k]);
            out.push(at[k]);
        }
        out.push(plat[at.len()]);
        out
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Plateau values at `tau = 0`, one more than the number of jumps.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn at_jump_lower(&self) -> &[f64] {
        &self.at_jump_lower
    }

    pub fn at_jump_upper(&self) -> &[f64] {
        &self.at_jump_upper
    }

    fn locate(&self, y: f64) -> Location {
        let k = self.jumps.partition_point(|&j| j < y);
        if k < self.jumps.len() && self.jumps[k] == y {
            Location::Jump(k)
        } else {
            Location::Plateau(k)
        }
    }

    /// `(Q(y, 0), Q(y, 1))`.
    pub fn bounds(&self, y: f64) -> Result<(f64, f64)> {
        if y.is_nan() {
            return Err(Error::Numeric("cannot evaluate a band at NaN".into()));
        }
        Ok(match self.locate(y) {
            Location::Plateau(k) => (self.lower[k], self.upper[k]),
            Location::Jump(k) => (self.at_jump_lower[k], self.at_jump_upper[k]),
        })
    }

    /// `Q(y, tau) = Q(y, 0) + tau * (Q(y, 1) - Q(y, 0))`.
    pub fn evaluate(&self, y: f64, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let (lo, hi) = self.bounds(y)?;
        Ok(mix(lo, hi, tau))
    }

    /// Randomization width `Q(y, 1) - Q(y, 0)`.
    pub fn slack(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.bounds(y)?;
        Ok(hi - lo)
    }

    /// Right limit `Q(y+, tau)`.
    pub fn right_limit(&self, y: f64, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        if y.is_nan() {
            return Err(Error::Numeric("cannot evaluate a band at NaN".into()));
        }
        let k = self.jumps.partition_point(|&j| j <= y);
        Ok(mix(self.lower[k], self.upper[k], tau))
    }

    /// Mass that the measure `(u, v] -> Q(v+, tau) - Q(u+, tau)` puts on each jump.
    pub fn masses(&self, tau: f64) -> Result<Vec<f64>> {
        check_tau(tau)?;
        Ok((0..self.jumps.len())
            .map(|k| {
                mix(self.lower[k + 1], self.upper[k + 1], tau) - mix(self.lower[k], self.upper[k], tau)
            })
            .collect())
    }

    /// `integral of f` against the jump measure of `Q(., tau)`; no mass is
    /// placed at infinity.
    pub fn integrate<F>(&self, f: F, tau: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let masses = self.masses(tau)?;
        let mut total = 0.0;
        for (&y, m) in self.jumps.iter().zip(masses) {
            let v = f(y);
            if !v.is_finite() {
                return Err(Error::Numeric(format!("integrand is {v} at y = {y}")));
            }
            total += v * m;
        }
        Ok(total)
    }
}
