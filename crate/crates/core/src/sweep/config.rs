//! Versioned JSON run configuration.
//!
//! Every section is optional; command-line flags fill in or override
//! whatever the file leaves out.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "network": {"lambda_bs_km2": 500, "alpha": 1.037, "beta": 0.5},
//!   "theta_db": 5,
//!   "method": "polylog-compact",
//!   "simulation": {"realizations": 2000, "master_seed": 7}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FigureOptions, NetworkSpec, SweepSpec, ThresholdSearch};
use crate::analytic::CoverageMethod;
use crate::error::{Error, Result};
use crate::fitting::FitOptions;
use crate::montecarlo::SimulationSpec;
use crate::pathloss::Family;
use crate::quadrature::QuadConfig;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Network parameters at the boundary units; any of them may be left for
/// the command line to supply.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub lambda_bs_km2: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Noise power relative to unit transmit power.
    pub n0: Option<f64>,
}

impl NetworkConfig {
    /// Fields set in `other` win.
    pub fn merged(self, other: NetworkConfig) -> NetworkConfig {
        NetworkConfig {
            lambda_bs_km2: other.lambda_bs_km2.or(self.lambda_bs_km2),
            alpha: other.alpha.or(self.alpha),
            beta: other.beta.or(self.beta),
            n0: other.n0.or(self.n0),
        }
    }

    pub fn resolve(self) -> Result<NetworkSpec> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Validation(format!("missing network parameter '{name}'")))
        };
        let spec = NetworkSpec {
            lambda_bs_km2: need(self.lambda_bs_km2, "lambda_bs_km2")?,
            alpha: need(self.alpha, "alpha")?,
            beta: need(self.beta, "beta")?,
            n0: self.n0,
        };
        spec.params()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub theta_db: Option<f64>,
    #[serde(default)]
    pub method: Option<CoverageMethod>,
    #[serde(default)]
    pub quadrature: Option<QuadConfig>,
    #[serde(default)]
    pub simulation: Option<SimulationSpec>,
    #[serde(default)]
    pub fit: Option<FitOptions>,
    /// Families for the `fit` command; all of them when absent.
    #[serde(default)]
    pub families: Option<Vec<Family>>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub threshold_search: Option<ThresholdSearch>,
    #[serde(default)]
    pub figure: Option<FigureOptions>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            schema_version: CONFIG_SCHEMA_VERSION,
            network: NetworkConfig::default(),
            theta_db: None,
            method: None,
            quadrature: None,
            simulation: None,
            fit: None,
            families: None,
            sweep: None,
            threshold_search: None,
            figure: None,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config> {
        // read the version first so that a newer file gets a clear message
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        let Some(object) = value.as_object() else {
            return Err(Error::Parse("config must be a JSON object".into()));
        };
        match object.get("schema_version").map(|v| v.as_u64()) {
            Some(Some(v)) if v == u64::from(CONFIG_SCHEMA_VERSION) => {}
            Some(Some(other)) => {
                return Err(Error::Validation(format!(
                    "config schema version {other} is not supported (expected {CONFIG_SCHEMA_VERSION})"
                )))
            }
            Some(None) => return Err(Error::Parse("'schema_version' must be an unsigned integer".into())),
            None => return Err(Error::Validation("config is missing 'schema_version'".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let text = r#"{
            "schema_version": 1,
            "network": {"lambda_bs_km2": 500, "alpha": 1.037, "beta": 0.5},
            "theta_db": 5,
            "method": "polylog-compact",
            "simulation": {"realizations": 2000, "master_seed": 7}
        }"#;
        let c = Config::from_json(text).unwrap();
        assert_eq!(c.method, Some(CoverageMethod::PolylogCompact));
        let sim = c.simulation.as_ref().unwrap();
        assert_eq!((sim.realizations, sim.master_seed, sim.users_per_realization), (2000, 7, 20));
        let net = c.network.resolve().unwrap();
        assert_eq!(net.params().unwrap().lambda, 5e-4);
        assert_eq!(Config::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn version_and_unknown_fields_are_checked() {
        assert!(matches!(Config::from_json(r#"{"schema_version": 2}"#), Err(Error::Validation(_))));
        assert!(matches!(Config::from_json(r#"{}"#), Err(Error::Validation(_))));
        assert!(Config::from_json(r#"{"schema_version": 1, "lamda": 3}"#).is_err());
        assert!(Config::from_json(r#"{"schema_version": 1, "network": {"lambda": 3}}"#).is_err());
        assert!(Config::from_json("[1]").is_err());
        assert_eq!(Config::from_json(r#"{"schema_version": 1}"#).unwrap(), Config::default());
    }

    #[test]
    fn flags_override_file_values() {
        let file = NetworkConfig {
            lambda_bs_km2: Some(50.0),
            alpha: Some(1.037),
            beta: None,
            n0: None,
        };
        let flags = NetworkConfig {
            lambda_bs_km2: Some(500.0),
            beta: Some(0.5),
            ..Default::default()
        };
        let net = file.merged(flags).resolve().unwrap();
        assert_eq!((net.lambda_bs_km2, net.alpha, net.beta), (500.0, 1.037, 0.5));
        assert!(file.resolve().is_err());
        let bad = NetworkConfig {
            beta: Some(-1.0),
            ..file
        };
        assert!(bad.resolve().is_err());
    }
}
