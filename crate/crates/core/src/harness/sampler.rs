//! Synthetic data distributions with exact conditional expectations.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::observation::Observation;
use crate::stream::RandomStream;

/// A bounded continuous test function.
#[derive(Debug, Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    pub eval: fn(f64) -> f64,
    pub bound: f64,
    /// `integral of f over [0, 1]`, when known in closed form.
    pub unit_mean: Option<f64>,
}

fn clamp_unit(y: f64) -> f64 {
    y.clamp(-1.0, 1.0)
}

impl TestFunction {
    pub fn new(name: &'static str, eval: fn(f64) -> f64, bound: f64) -> Self {
        Self {
            name,
            eval,
            bound,
            unit_mean: None,
        }
    }

    /// `max(-1, min(1, y))`.
    pub fn clamp() -> Self {
        Self {
            name: "clamp",
            eval: clamp_unit,
            bound: 1.0,
            unit_mean: Some(0.5),
        }
    }

    pub fn cos() -> Self {
        Self {
            name: "cos",
            eval: f64::cos,
            bound: 1.0,
            unit_mean: Some(1f64.sin()),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "clamp" => Ok(Self::clamp()),
            "cos" => Ok(Self::cos()),
            other => Err(Error::Configuration(format!("unknown test function '{other}'"))),
        }
    }

    #[inline]
    pub fn apply(&self, y: f64) -> f64 {
        (self.eval)(y)
    }
}

/// Built-in data distributions; every predictor is `x ~ U[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    /// `y = 2x + nu`, `nu` uniform on `{-1, +1}`.
    P1,
    /// `y ~ U[0, 1]` independent of `x`.
    P2,
    /// `y ~ Bernoulli(x)`.
    P3,
    /// `y = c`.
    Constant(f64),
}

impl Sampler {
    /// Draws `x` then the response, always consuming two uniforms.
    pub fn draw(&self, s: &mut RandomStream) -> Observation {
        let x = s.uniform();
        let u = s.uniform();
        let y = match self {
            Sampler::P1 => 2.0 * x + if u < 0.5 { -1.0 } else { 1.0 },
            Sampler::P2 => u,
            Sampler::P3 => {
                if u < x {
                    1.0
                } else {
                    0.0
                }
            }
            Sampler::Constant(c) => *c,
        };
        Observation { x: vec![x], y }
    }

    pub fn draw_n(&self, n: usize, s: &mut RandomStream) -> Vec<Observation> {
        (0..n).map(|_| self.draw(s)).collect()
    }

    /// `E(f(y) | x)`, or `None` when no closed form is registered.
    pub fn conditional_expectation(&self, f: &TestFunction, x: f64) -> Option<f64> {
        match self {
            Sampler::P1 => Some((f.apply(2.0 * x - 1.0) + f.apply(2.0 * x + 1.0)) / 2.0),
            Sampler::P2 => f.unit_mean,
            Sampler::P3 => Some((1.0 - x) * f.apply(0.0) + x * f.apply(1.0)),
            Sampler::Constant(c) => Some(f.apply(*c)),
        }
    }

    /// `P(y <= t)` under the marginal law of `y`.
    pub fn marginal_cdf(&self, t: f64) -> f64 {
        match self {
            // y = 2x - 1 ~ U[-1, 1] or y = 2x + 1 ~ U[1, 3], each with weight 1/2
            Sampler::P1 => 0.5 * ((t + 1.0) / 2.0).clamp(0.0, 1.0) + 0.5 * ((t - 1.0) / 2.0).clamp(0.0, 1.0),
            Sampler::P2 => t.clamp(0.0, 1.0),
            Sampler::P3 => {
                if t < 0.0 {
                    0.0
                } else if t < 1.0 {
                    0.5
                } else {
                    1.0
                }
            }
            Sampler::Constant(c) => {
                if t >= *c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Sampler::P3)
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::P1 => f.write_str("P1"),
            Sampler::P2 => f.write_str("P2"),
            Sampler::P3 => f.write_str("P3"),
            Sampler::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P1" | "p1" => Ok(Sampler::P1),
            "P2" | "p2" => Ok(Sampler::P2),
            "P3" | "p3" => Ok(Sampler::P3),
            other => match other.strip_prefix("const:").map(str::parse::<f64>) {
                Some(Ok(c)) if c.is_finite() => Ok(Sampler::Constant(c)),
                _ => Err(Error::Configuration(format!("unknown sampler '{other}'"))),
            },
        }
    }
}
