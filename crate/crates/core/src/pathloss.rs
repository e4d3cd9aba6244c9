//! Path-loss model families and the network parameter set.
//!
//! All distances are meters and all gains are linear power ratios; dB only
//! appears in [`PathLossModel::gain_db`].

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// `10·log10(e)`, converts a natural-log gain to dB.
pub const DB_PER_NEPER: f64 = 4.342_944_819_032_518;

/// One row of the path-loss model zoo, with its parameters.
///
/// JSON form: `{"family": "PL1", "params": {"A": 0.0094, "alpha": 0.9019, "beta": 0.521}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", deny_unknown_fields)]
pub enum PathLossModel {
    /// `A·exp(-α r^β)`
    #[serde(rename = "PL1")]
    StretchedExp {
        #[serde(rename = "A")]
        a: f64,
        alpha: f64,
        beta: f64,
    },
    /// `A·exp(-α r^β)·r^(-η)`
    #[serde(rename = "PL2")]
    StretchedExpPower {
        #[serde(rename = "A")]
        a: f64,
        alpha: f64,
        beta: f64,
        eta: f64,
    },
    /// `A·exp(-α r)·r^(-η)`
    #[serde(rename = "PL3")]
    ExpPower {
        #[serde(rename = "A")]
        a: f64,
        alpha: f64,
        eta: f64,
    },
    /// `A·exp(-α r)·r^(-2)`
    #[serde(rename = "PL4")]
    ExpSquare {
        #[serde(rename = "A")]
        a: f64,
        alpha: f64,
    },
    /// `A·min(exp(-α r)·r^(-2), r^(-2))`
    #[serde(rename = "PL5")]
    ExpSquareMin {
        #[serde(rename = "A")]
        a: f64,
        alpha: f64,
    },
    /// `A·r^(-η_i)` for `R_i < r ≤ R_{i+1}`, with `R_0 = 0` and the last
    /// interval unbounded. `breakpoints` holds `R_1, R_2, ...`.
    #[serde(rename = "PL6")]
    MultiSlope {
        #[serde(rename = "A")]
        a: f64,
        eta: Vec<f64>,
        breakpoints: Vec<f64>,
    },
    /// `A·(1 + r)^(-η)`
    #[serde(rename = "PL7")]
    OffsetPower {
        #[serde(rename = "A")]
        a: f64,
        eta: f64,
    },
    /// `A·(1 + r^η)^(-1)`
    #[serde(rename = "PL8")]
    BoundedPower {
        #[serde(rename = "A")]
        a: f64,
        eta: f64,
    },
    /// `A·r^(-η)`
    #[serde(rename = "PL9")]
    Power {
        #[serde(rename = "A")]
        a: f64,
        eta: f64,
    },
    /// `exp(-α r^β)` up to `r_switch`, `r^(-η)` beyond.
    #[serde(rename = "PL10")]
    Hybrid {
        alpha: f64,
        beta: f64,
        eta: f64,
        r_switch: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    PL1,
    PL2,
    PL3,
    PL4,
    PL5,
    PL6,
    PL7,
    PL8,
    PL9,
    PL10,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::PL1,
        Family::PL2,
        Family::PL3,
        Family::PL4,
        Family::PL5,
        Family::PL6,
        Family::PL7,
        Family::PL8,
        Family::PL9,
        Family::PL10,
    ];

    /// Number of free parameters when fitted (PL6 in its two-slope form).
    pub fn parameter_count(self) -> usize {
        match self {
            Family::PL1 => 3,
            Family::PL2 => 4,
            Family::PL3 => 3,
            Family::PL4 | Family::PL5 => 2,
            Family::PL6 => 4,
            Family::PL7 | Family::PL8 | Family::PL9 => 2,
            Family::PL10 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::PL1 => "PL1",
            Family::PL2 => "PL2",
            Family::PL3 => "PL3",
            Family::PL4 => "PL4",
            Family::PL5 => "PL5",
            Family::PL6 => "PL6",
            Family::PL7 => "PL7",
            Family::PL8 => "PL8",
            Family::PL9 => "PL9",
            Family::PL10 => "PL10",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Validation(format!("unknown path-loss family '{s}'")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure(v > 0.0 && v.is_finite(), || format!("{name} must be finite and > 0, got {v}"))
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    ensure(v >= 0.0 && v.is_finite(), || format!("{name} must be finite and >= 0, got {v}"))
}

impl PathLossModel {
    /// Parses and validates the JSON form.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: PathLossModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path-loss models always serialize")
    }

    pub fn family(&self) -> Family {
        match self {
            PathLossModel::StretchedExp { .. } => Family::PL1,
            PathLossModel::StretchedExpPower { .. } => Family::PL2,
            PathLossModel::ExpPower { .. } => Family::PL3,
            PathLossModel::ExpSquare { .. } => Family::PL4,
            PathLossModel::ExpSquareMin { .. } => Family::PL5,
            PathLossModel::MultiSlope { .. } => Family::PL6,
            PathLossModel::OffsetPower { .. } => Family::PL7,
            PathLossModel::BoundedPower { .. } => Family::PL8,
            PathLossModel::Power { .. } => Family::PL9,
            PathLossModel::Hybrid { .. } => Family::PL10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PathLossModel::StretchedExp { a, alpha, beta } => {
                positive("A", *a)?;
                positive("alpha", *alpha)?;
                positive("beta", *beta)
            }
            PathLossModel::StretchedExpPower { a, alpha, beta, eta } => {
                positive("A", *a)?;
                positive("alpha", *alpha)?;
                positive("beta", *beta)?;
                non_negative("eta", *eta)
            }
            PathLossModel::ExpPower { a, alpha, eta } => {
                positive("A", *a)?;
                positive("alpha", *alpha)?;
                positive("eta", *eta)
            }
            PathLossModel::ExpSquare { a, alpha } | PathLossModel::ExpSquareMin { a, alpha } => {
                positive("A", *a)?;
                positive("alpha", *alpha)
            }
            PathLossModel::MultiSlope { a, eta, breakpoints } => {
                positive("A", *a)?;
                ensure(!eta.is_empty(), || "PL6 needs at least one exponent".into())?;
                ensure(eta.len() == breakpoints.len() + 1, || {
                    format!(
                        "PL6 needs one more exponent than breakpoints, got {} and {}",
                        eta.len(),
                        breakpoints.len()
                    )
                })?;
                for &e in eta {
                    non_negative("eta", e)?;
                }
                ensure(eta.windows(2).all(|w| w[1] >= w[0]), || {
                    "PL6 exponents must be non-decreasing".into()
                })?;
                for &r in breakpoints {
                    // A single gain constant across slopes only stays
                    // non-increasing if every breakpoint is at or beyond 1 m.
                    ensure(r >= 1.0 && r.is_finite(), || {
                        format!("PL6 breakpoints must be finite and >= 1 m, got {r}")
                    })?;
                }
                ensure(breakpoints.windows(2).all(|w| w[1] > w[0]), || {
                    "PL6 breakpoints must be strictly increasing".into()
                })
            }
            PathLossModel::OffsetPower { a, eta }
            | PathLossModel::BoundedPower { a, eta }
            | PathLossModel::Power { a, eta } => {
                positive("A", *a)?;
                positive("eta", *eta)
            }
            PathLossModel::Hybrid {
                alpha,
                beta,
                eta,
                r_switch,
            } => {
                positive("alpha", *alpha)?;
                positive("beta", *beta)?;
                positive("eta", *eta)?;
                positive("r_switch", *r_switch)
            }
        }
    }

    /// True when the gain stays finite as `r → 0`.
    pub fn is_bounded(&self) -> bool {
        match self {
            PathLossModel::StretchedExp { .. }
            | PathLossModel::OffsetPower { .. }
            | PathLossModel::BoundedPower { .. }
            | PathLossModel::Hybrid { .. } => true,
            PathLossModel::StretchedExpPower { eta, .. } => *eta == 0.0,
            _ => false,
        }
    }

    /// Natural log of the linear gain at distance `r`.
    pub fn log_gain(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || r.is_infinite() {
            return Err(Error::Domain(format!("distance must be finite and >= 0, got {r}")));
        }
        if r == 0.0 {
            return match self {
                PathLossModel::StretchedExp { a, .. }
                | PathLossModel::StretchedExpPower { a, .. }
                | PathLossModel::OffsetPower { a, .. }
                | PathLossModel::BoundedPower { a, .. }
                    if self.is_bounded() =>
                {
                    Ok(a.ln())
                }
                PathLossModel::Hybrid { .. } => Ok(0.0),
                _ => Err(Error::Domain(format!(
                    "{} is singular at r = 0",
                    self.family()
                ))),
            };
        }
        let ln_r = || r.ln();
        let value = match self {
            PathLossModel::StretchedExp { a, alpha, beta } => a.ln() - alpha * r.powf(*beta),
            PathLossModel::StretchedExpPower { a, alpha, beta, eta } => {
                a.ln() - alpha * r.powf(*beta) - eta * ln_r()
            }
            PathLossModel::ExpPower { a, alpha, eta } => a.ln() - alpha * r - eta * ln_r(),
            PathLossModel::ExpSquare { a, alpha } => a.ln() + -alpha * r - 2.0 * ln_r(),
            PathLossModel::ExpSquareMin { a, alpha } => a.ln() + (-alpha * r).min(0.0) - 2.0 * ln_r(),
            PathLossModel::MultiSlope { a, eta, breakpoints } => {
                // interval i covers (R_i, R_{i+1}]
                let i = breakpoints.partition_point(|&b| b < r);
                a.ln() - eta[i] * ln_r()
            }
            PathLossModel::OffsetPower { a, eta } => a.ln() - eta * r.ln_1p(),
            PathLossModel::BoundedPower { a, eta } => a.ln() - softplus(eta * ln_r()),
            PathLossModel::Power { a, eta } => a.ln() - eta * ln_r(),
            PathLossModel::Hybrid {
                alpha,
                beta,
                eta,
                r_switch,
            } => {
                if r <= *r_switch {
                    -alpha * r.powf(*beta)
                } else {
                    -eta * ln_r()
                }
            }
        };
        Ok(value)
    }

    /// Linear power gain at distance `r` (meters).
    pub fn evaluate_gain(&self, r: f64) -> Result<f64> {
        self.log_gain(r).map(f64::exp)
    }

    /// Gain in dB at distance `r` (meters).
    pub fn gain_db(&self, r: f64) -> Result<f64> {
        self.log_gain(r).map(|g| DB_PER_NEPER * g)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Tolerance on `2/β` being an integer.
pub const INTEGER_ORDER_TOL: f64 = 1e-9;

/// Density, path-loss and noise parameters of the network.
///
/// `lambda` is in BS/m², `alpha` in m^(-β); `n0` is the mean noise power on
/// the scale where the transmit power and `A` are one. `None` or zero means
/// interference-limited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
}

impl NetworkParams {
    pub fn new(lambda: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = NetworkParams {
            lambda,
            alpha,
            beta,
            n0: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_noise(mut self, n0: f64) -> Result<Self> {
        self.n0 = Some(n0);
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        ensure(self.beta <= 2.0, || format!("beta must lie in (0, 2], got {}", self.beta))?;
        if let Some(n0) = self.n0 {
            non_negative("n0", n0)?;
        }
        Ok(())
    }

    /// Noise power, zero when interference-limited.
    pub fn noise(&self) -> f64 {
        self.n0.unwrap_or(0.0)
    }

    pub fn has_noise(&self) -> bool {
        self.noise() > 0.0
    }

    /// The integer `n` with `β = 2/(n+1)`, if there is one.
    pub fn polylog_order(&self) -> Option<u32> {
        let q = 2.0 / self.beta;
        let k = q.round();
        if k >= 1.0 && (q - k).abs() < INTEGER_ORDER_TOL {
            Some(k as u32 - 1)
        } else {
            None
        }
    }

    pub fn require_polylog_order(&self) -> Result<u32> {
        self.polylog_order().ok_or_else(|| {
            Error::Precondition(format!(
                "beta = {} is not of the form 2/(n+1) for an integer n >= 0",
                self.beta
            ))
        })
    }

    /// The stretched-exponential link model with unit gain constant.
    pub fn path_loss(&self) -> PathLossModel {
        PathLossModel::StretchedExp {
            a: 1.0,
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    /// `∫₀^∞ e^(-α r^β) 2πr dr = π Γ(1 + 2/β) / α^(2/β)`: the mean
    /// interference per unit density.
    pub fn campbell_constant(&self) -> f64 {
        let q = 2.0 / self.beta;
        std::f64::consts::PI * crate::special::gamma(1.0 + q) / self.alpha.powf(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pl1(a: f64, alpha: f64, beta: f64) -> PathLossModel {
        PathLossModel::StretchedExp { a, alpha, beta }
    }

    #[test]
    fn examples() {
        let table_row1 = pl1(0.0094, 0.9019, 0.5210);
        assert!((table_row1.evaluate_gain(1e-12).unwrap() - 0.0094).abs() < 1e-8);
        assert_eq!(table_row1.evaluate_gain(0.0).unwrap(), 0.0094);

        let power = PathLossModel::Power { a: 1.0, eta: 2.0 };
        assert!((power.evaluate_gain(10.0).unwrap() - 0.01).abs() < 1e-16);
        assert!((power.gain_db(10.0).unwrap() + 20.0).abs() < 1e-12);

        let unit = pl1(1.0, 1.0, 1.0);
        assert!((unit.evaluate_gain(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(unit.gain_db(0.0).unwrap(), 0.0);

        let pl4 = PathLossModel::ExpSquare { a: 0.0758, alpha: 0.0281 };
        let want = 10.0 * (0.0758 * (-2.81f64).exp() * 1e-4).log10();
        assert!((pl4.gain_db(100.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn singular_models_reject_zero_distance() {
        for m in [
            PathLossModel::ExpPower { a: 1.0, alpha: 0.1, eta: 2.0 },
            PathLossModel::ExpSquare { a: 1.0, alpha: 0.1 },
            PathLossModel::ExpSquareMin { a: 1.0, alpha: 0.1 },
            PathLossModel::MultiSlope { a: 1.0, eta: vec![2.0], breakpoints: vec![] },
            PathLossModel::Power { a: 1.0, eta: 2.0 },
            PathLossModel::StretchedExpPower { a: 1.0, alpha: 1.0, beta: 1.0, eta: 0.5 },
        ] {
            assert!(matches!(m.evaluate_gain(0.0), Err(Error::Domain(_))), "{m:?}");
        }
        let hybrid = PathLossModel::Hybrid { alpha: 1.0, beta: 0.5, eta: 4.0, r_switch: 350.0 };
        assert_eq!(hybrid.evaluate_gain(0.0).unwrap(), 1.0);
        assert!(pl1(1.0, 1.0, 1.0).evaluate_gain(-1.0).is_err());
        assert!(pl1(1.0, 1.0, 1.0).evaluate_gain(f64::NAN).is_err());
    }

    #[test]
    fn pl1_bounded_by_one() {
        let m = pl1(1.0, 0.3, 0.7);
        for r in [1e-6, 0.5, 3.0, 1e3] {
            assert!(m.evaluate_gain(r).unwrap() <= 1.0);
        }
    }

    #[test]
    fn multislope_half_open_intervals() {
        let m = PathLossModel::MultiSlope {
            a: 1.0,
            eta: vec![2.0, 4.0],
            breakpoints: vec![10.0],
        };
        // r = R_1 belongs to the first interval
        assert!((m.gain_db(10.0).unwrap() + 20.0).abs() < 1e-12);
        assert!((m.gain_db(10.0 + 1e-9).unwrap() + 40.0).abs() < 1e-6);
    }

    #[test]
    fn validation() {
        assert!(pl1(0.0, 1.0, 1.0).validate().is_err());
        assert!(PathLossModel::StretchedExpPower { a: 1.0, alpha: 1.0, beta: 1.0, eta: 0.0 }
            .validate()
            .is_ok());
        let decreasing = PathLossModel::MultiSlope {
            a: 1.0,
            eta: vec![3.0, 2.0],
            breakpoints: vec![10.0],
        };
        assert!(decreasing.validate().is_err());
        let unordered = PathLossModel::MultiSlope {
            a: 1.0,
            eta: vec![2.0, 3.0, 4.0],
            breakpoints: vec![10.0, 10.0],
        };
        assert!(unordered.validate().is_err());
        let short = PathLossModel::MultiSlope { a: 1.0, eta: vec![2.0, 3.0], breakpoints: vec![] };
        assert!(short.validate().is_err());
    }

    #[test]
    fn json_format() {
        let text = r#"{"family": "PL1", "params": {"A": 0.0094, "alpha": 0.9019, "beta": 0.521}}"#;
        let m = PathLossModel::from_json(text).unwrap();
        assert_eq!(m, pl1(0.0094, 0.9019, 0.521));
        assert_eq!(PathLossModel::from_json(&m.to_json()).unwrap(), m);

        let pl6 = r#"{"family":"PL6","params":{"A":5.3576,"eta":[3.4892,4.0345],"breakpoints":[142.7778]}}"#;
        assert_eq!(PathLossModel::from_json(pl6).unwrap().family(), Family::PL6);

        assert!(PathLossModel::from_json(r#"{"family":"PL11","params":{}}"#).is_err());
        assert!(PathLossModel::from_json(r#"{"family":"PL9","params":{"A":-1,"eta":2}}"#).is_err());
    }

    #[test]
    fn network_params() {
        let p = NetworkParams::new(1e-4, 1.037, 0.5).unwrap();
        assert_eq!(p.polylog_order(), Some(3));
        let two_thirds = NetworkParams::new(1e-4, 1.0, 0.6666666666666666).unwrap();
        assert_eq!(two_thirds.polylog_order(), Some(2));
        assert_eq!(NetworkParams::new(1e-4, 1.0, 2.0).unwrap().polylog_order(), Some(0));
        assert_eq!(NetworkParams::new(1e-4, 1.0, 0.8).unwrap().polylog_order(), None);
        assert!(NetworkParams::new(1e-4, 1.0, 0.8).unwrap().require_polylog_order().is_err());
        assert!(NetworkParams::new(0.0, 1.0, 1.0).is_err());
        assert!(NetworkParams::new(1.0, 1.0, 2.5).is_err());
        assert!(p.with_noise(-1.0).is_err());
        // n integer: campbell constant is π(n+1)!/α^(n+1)
        let c = NetworkParams::new(1.0, 2.0, 1.0).unwrap().campbell_constant();
        assert!((c - std::f64::consts::PI * 2.0 / 4.0).abs() < 1e-14);
    }

    fn any_model() -> impl Strategy<Value = PathLossModel> {
        let pos = 0.01f64..5.0;
        prop_oneof![
            (pos.clone(), pos.clone(), 0.1f64..2.0).prop_map(|(a, alpha, beta)| pl1(a, alpha, beta)),
            (pos.clone(), pos.clone(), 0.1f64..2.0, 0.0f64..4.0).prop_map(|(a, alpha, beta, eta)| {
                PathLossModel::StretchedExpPower { a, alpha, beta, eta }
            }),
            (pos.clone(), pos.clone(), 0.1f64..4.0)
                .prop_map(|(a, alpha, eta)| PathLossModel::ExpPower { a, alpha, eta }),
            (pos.clone(), pos.clone()).prop_map(|(a, alpha)| PathLossModel::ExpSquare { a, alpha }),
            (pos.clone(), pos.clone()).prop_map(|(a, alpha)| PathLossModel::ExpSquareMin { a, alpha }),
            (pos.clone(), 0.0f64..3.0, 0.0f64..3.0, 1.0f64..500.0).prop_map(|(a, e1, de, r1)| {
                PathLossModel::MultiSlope { a, eta: vec![e1, e1 + de], breakpoints: vec![r1] }
            }),
            (pos.clone(), 0.1f64..5.0).prop_map(|(a, eta)| PathLossModel::OffsetPower { a, eta }),
            (pos.clone(), 0.1f64..5.0).prop_map(|(a, eta)| PathLossModel::BoundedPower { a, eta }),
            (pos.clone(), 0.1f64..5.0).prop_map(|(a, eta)| PathLossModel::Power { a, eta }),
            (pos.clone(), 0.1f64..2.0, 0.1f64..5.0, 1.0f64..500.0).prop_map(
                |(alpha, beta, eta, r_switch)| PathLossModel::Hybrid {
                    alpha: alpha * 1e-2,
                    beta,
                    eta,
                    r_switch
                }
            ),
        ]
    }

    proptest! {
        #[test]
        fn gains_non_increasing(m in any_model(), r in 0.01f64..2000.0, step in 0.0f64..500.0) {
            let near = m.log_gain(r).unwrap();
            let far = m.log_gain(r + step).unwrap();
            // PL10 jumps upwards at the switch when the power-law piece starts
            // above the exponential one; only the non-increasing splices count.
            let upward_splice = match &m {
                PathLossModel::Hybrid { alpha, beta, eta, r_switch } => {
                    -eta * r_switch.ln() > -alpha * r_switch.powf(*beta)
                }
                _ => false,
            };
            if !upward_splice {
                prop_assert!(far <= near + 1e-12, "{m:?}: g({r}) = {near}, g({}) = {far}", r + step);
            }
        }

        #[test]
        fn pl2_with_zero_eta_is_pl1(a in 0.01f64..5.0, alpha in 0.01f64..5.0, beta in 0.1f64..2.0, r in 0.0f64..1000.0) {
            let p1 = pl1(a, alpha, beta);
            let p2 = PathLossModel::StretchedExpPower { a, alpha, beta, eta: 0.0 };
            prop_assert_eq!(p1.gain_db(r).unwrap(), p2.gain_db(r).unwrap());
        }

        #[test]
        fn pl5_equals_pl4(a in 0.01f64..5.0, alpha in 0.001f64..1.0, r in 0.01f64..1000.0) {
            let p4 = PathLossModel::ExpSquare { a, alpha };
            let p5 = PathLossModel::ExpSquareMin { a, alpha };
            prop_assert_eq!(p4.gain_db(r).unwrap(), p5.gain_db(r).unwrap());
        }

        #[test]
        fn pl10_splices_pl1_and_pl9(alpha in 0.001f64..1.0, beta in 0.2f64..2.0, eta in 1.0f64..5.0, rs in 10.0f64..500.0, r in 0.0f64..1000.0) {
            let hybrid = PathLossModel::Hybrid { alpha, beta, eta, r_switch: rs };
            let want = if r <= rs {
                pl1(1.0, alpha, beta).gain_db(r).unwrap()
            } else {
                PathLossModel::Power { a: 1.0, eta }.gain_db(r).unwrap()
            };
            prop_assert_eq!(hybrid.gain_db(r).unwrap(), want);
        }

        #[test]
        fn json_round_trip(m in any_model()) {
            prop_assert_eq!(PathLossModel::from_json(&m.to_json()).unwrap(), m);
        }
    }
}
