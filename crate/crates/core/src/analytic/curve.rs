use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CoverageMethod, SirThreshold};
use crate::error::{Error, Result};
use crate::pathloss::NetworkParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Coverage,
    PotentialThroughput,
    Ase,
    /// Throughput-maximising threshold, in dB.
    OptimalThreshold,
    /// Path gain in dB against distance.
    PathGain,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Coverage,
        Metric::PotentialThroughput,
        Metric::Ase,
        Metric::OptimalThreshold,
        Metric::PathGain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::PotentialThroughput => "potential_throughput",
            Metric::Ase => "ase",
            Metric::OptimalThreshold => "optimal_threshold",
            Metric::PathGain => "path_gain",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown metric '{s}'")))
    }
}

/// Where the values of a curve come from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CurveMethod {
    Analytic(CoverageMethod),
    MonteCarlo,
    /// A path-loss model family, e.g. `model:PL1`.
    Model(String),
    /// Measured data.
    Measured,
    /// A density-independent closed-form value such as the ASE ceiling.
    ClosedForm,
}

impl fmt::Display for CurveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveMethod::Analytic(m) => f.write_str(m.name()),
            CurveMethod::MonteCarlo => f.write_str("monte-carlo"),
            CurveMethod::Model(name) => write!(f, "model:{name}"),
            CurveMethod::Measured => f.write_str("measured"),
            CurveMethod::ClosedForm => f.write_str("closed-form"),
        }
    }
}

impl FromStr for CurveMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte-carlo" => Ok(CurveMethod::MonteCarlo),
            "measured" => Ok(CurveMethod::Measured),
            "closed-form" => Ok(CurveMethod::ClosedForm),
            _ => match s.strip_prefix("model:") {
                Some(name) if !name.is_empty() && !name.contains(',') => Ok(CurveMethod::Model(name.to_string())),
                Some(_) => Err(Error::Parse(format!("bad model label '{s}'"))),
                None => s.parse().map(CurveMethod::Analytic),
            },
        }
    }
}

impl Serialize for CurveMethod {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CurveMethod {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One abscissa of a curve. `y` is `None` when the evaluation failed; the
/// reason is kept in `note`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: Option<f64>,
    /// Quadrature error estimate or Monte Carlo standard error.
    pub err: Option<f64>,
    pub note: Option<String>,
}

impl CurvePoint {
    pub fn value(x: f64, y: f64, err: f64) -> Self {
        CurvePoint {
            x,
            y: Some(y),
            err: Some(err),
            note: None,
        }
    }

    pub fn gap(x: f64, reason: impl Into<String>) -> Self {
        CurvePoint {
            x,
            y: None,
            err: None,
            note: Some(reason.into()),
        }
    }
}

/// An ordered series of metric values against one swept quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCurve {
    /// Identifies the curve within a file, e.g. `lambda=50`.
    pub label: String,
    pub metric: Metric,
    pub method: CurveMethod,
    pub abscissa: String,
    pub points: Vec<CurvePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<NetworkParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<SirThreshold>,
}

impl MetricCurve {
    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() || self.label.contains(['\n', '\r']) {
            return Err(Error::Validation("curve label must be a non-empty single line".into()));
        }
        if self.abscissa.is_empty() || self.abscissa.contains(['\n', '\r', ',']) {
            return Err(Error::Validation(format!("bad abscissa name '{}'", self.abscissa)));
        }
        // measurements may repeat a distance
        let repeats = self.method == CurveMethod::Measured;
        for w in self.points.windows(2) {
            if !(w[1].x > w[0].x || repeats && w[1].x == w[0].x) {
                return Err(Error::Validation(format!(
                    "curve '{}': abscissa not increasing at {} -> {}",
                    self.label, w[0].x, w[1].x
                )));
            }
        }
        for p in &self.points {
            if !p.x.is_finite() {
                return Err(Error::Validation(format!("curve '{}': non-finite abscissa", self.label)));
            }
            if let Some(y) = p.y {
                if !y.is_finite() {
                    return Err(Error::Validation(format!("curve '{}': non-finite value at {}", self.label, p.x)));
                }
                if self.metric == Metric::Coverage && !(0.0..=1.0).contains(&y) {
                    return Err(Error::Validation(format!(
                        "curve '{}': coverage {y} outside [0, 1] at {}",
                        self.label, p.x
                    )));
                }
            }
        }
        Ok(())
    }

    /// The point with the largest value, ignoring gaps.
    pub fn argmax(&self) -> Option<&CurvePoint> {
        self.points
            .iter()
            .filter(|p| p.y.is_some())
            .fold(None, |best: Option<&CurvePoint>, p| match best {
                Some(b) if b.y >= p.y => Some(b),
                _ => Some(p),
            })
    }

    pub fn gaps(&self) -> usize {
        self.points.iter().filter(|p| p.y.is_none()).count()
    }
}
