//! Coverage probability, potential throughput and area spectral efficiency
//! of the typical downlink user.
//!
//! Every metric is parameterised by [`NetworkParams`](crate::NetworkParams)
//! in SI units (BS/m², m^-β) and a linear [`SirThreshold`].

mod ase;
mod coverage;
mod curve;
mod laplace;
mod throughput;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathloss::NetworkParams;
use crate::quadrature::Integral;
use crate::special::ln_1p_exp;

pub use ase::{ase, ase_limit, ase_upper_bound, campbell_mean_interference, CampbellCheck};
pub use coverage::{
    coverage, coverage_beta1, coverage_beta2, coverage_bound, coverage_general, coverage_polylog,
    polylog_coefficients, select_method,
};
pub use curve::{CurveMethod, CurvePoint, Metric, MetricCurve};
pub use laplace::laplace_interference;
pub use throughput::{optimal_density_beta2, potential_throughput, throughput_argmax_density, DensityOptimum};

/// Coverage threshold θ, stored on the linear scale together with `ln θ`
/// so that thresholds beyond the range of `f64` (met when integrating over
/// all rates in sparse networks) stay representable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SirThreshold {
    linear: f64,
    ln: f64,
}

impl SirThreshold {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta.is_finite() {
            Ok(SirThreshold {
                linear: theta,
                ln: theta.ln(),
            })
        } else {
            Err(Error::Domain(format!("SIR threshold must be positive and finite, got {theta}")))
        }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::Domain(format!("SIR threshold in dB must be finite, got {db}")));
        }
        Self::new(10f64.powf(db / 10.0))
    }

    /// Threshold `e^l`; the linear value may overflow to infinity.
    pub fn from_ln(l: f64) -> Result<Self> {
        if !l.is_finite() {
            return Err(Error::Domain(format!("ln θ must be finite, got {l}")));
        }
        Ok(SirThreshold {
            linear: l.exp(),
            ln: l,
        })
    }

    pub fn linear(self) -> f64 {
        self.linear
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    /// `ln(1 + θ)`, the Shannon rate in nats.
    pub fn ln_1p(self) -> f64 {
        if self.linear.is_finite() {
            self.linear.ln_1p()
        } else {
            ln_1p_exp(self.ln)
        }
    }

    pub fn db(self) -> f64 {
        10.0 * self.ln / std::f64::consts::LN_10
    }
}

impl TryFrom<f64> for SirThreshold {
    type Error = Error;
    fn try_from(theta: f64) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<SirThreshold> for f64 {
    fn from(t: SirThreshold) -> f64 {
        t.linear
    }
}

/// How a coverage probability is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMethod {
    /// Nested quadrature of the Laplace-transform representation; any β.
    GeneralQuadrature,
    /// Single quadrature over polylogarithm coefficients; β = 2/(n+1).
    PolylogCompact,
    /// Closed form with a Mills-ratio term; β = 1.
    ClosedBeta1,
    /// Closed form `(1+θ)^(-πλ/α)`; β = 2.
    ClosedBeta2,
    /// Keeps the constant, highest-order and quadratic terms; an extended
    /// incomplete gamma function.
    UpperBoundGamma,
    /// Keeps only the constant term: `exp(λ a_0)`.
    UpperBoundPolylog,
    /// Replaces the polylogarithm in the constant term by `-ln(1+θ)`.
    UpperBoundLog,
    /// Jensen's inequality over the serving distance.
    LowerBoundJensen,
}

impl CoverageMethod {
    pub const ALL: [CoverageMethod; 8] = [
        CoverageMethod::GeneralQuadrature,
        CoverageMethod::PolylogCompact,
        CoverageMethod::ClosedBeta1,
        CoverageMethod::ClosedBeta2,
        CoverageMethod::UpperBoundGamma,
        CoverageMethod::UpperBoundPolylog,
        CoverageMethod::UpperBoundLog,
        CoverageMethod::LowerBoundJensen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoverageMethod::GeneralQuadrature => "general-quadrature",
            CoverageMethod::PolylogCompact => "polylog-compact",
            CoverageMethod::ClosedBeta1 => "closed-beta1",
            CoverageMethod::ClosedBeta2 => "closed-beta2",
            CoverageMethod::UpperBoundGamma => "upper-bound-gamma",
            CoverageMethod::UpperBoundPolylog => "upper-bound-polylog",
            CoverageMethod::UpperBoundLog => "upper-bound-log",
            CoverageMethod::LowerBoundJensen => "lower-bound-jensen",
        }
    }

    /// Fails with a precondition error when the method does not apply to
    /// `params`.
    pub fn check(self, params: &NetworkParams) -> Result<()> {
        let order = match self {
            CoverageMethod::GeneralQuadrature => return Ok(()),
            CoverageMethod::PolylogCompact => {
                params.require_polylog_order()?;
                return Ok(());
            }
            CoverageMethod::ClosedBeta1 => Some(1),
            CoverageMethod::ClosedBeta2 => Some(0),
            _ => None,
        };
        let n = params.require_polylog_order()?;
        if let Some(want) = order {
            if n != want {
                return Err(Error::Precondition(format!(
                    "{self} requires beta = {}, got {}",
                    2.0 / f64::from(want + 1),
                    params.beta
                )));
            }
        }
        if params.has_noise() {
            return Err(Error::Precondition(format!("{self} holds only without noise")));
        }
        Ok(())
    }

    pub fn is_bound(self) -> bool {
        matches!(
            self,
            CoverageMethod::UpperBoundGamma
                | CoverageMethod::UpperBoundPolylog
                | CoverageMethod::UpperBoundLog
                | CoverageMethod::LowerBoundJensen
        )
    }
}

impl fmt::Display for CoverageMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoverageMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CoverageMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown coverage method '{s}'")))
    }
}

/// A computed value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, abs_error: 0.0 }
    }

    pub(crate) fn scaled(self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            abs_error: self.abs_error * factor.abs(),
        }
    }
}

impl From<Integral> for Estimate {
    fn from(i: Integral) -> Self {
        Estimate {
            value: i.value,
            abs_error: i.abs_error,
        }
    }
}
