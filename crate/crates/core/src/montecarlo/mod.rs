//! System-level simulation of a Poisson network: base stations dropped
//! uniformly in a square, users uniformly in a central window, nearest-BS
//! association and Rayleigh fading on every link.
//!
//! Each realization draws from its own ChaCha streams keyed by the master
//! seed and the realization index, so results are identical for any number
//! of worker threads.

mod network;
mod rng;

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::SirThreshold;
use crate::error::{ensure, Error, Result};
use crate::pathloss::{NetworkParams, PathLossModel};
use crate::special::ln_1p_exp;

use network::{run_realization, Setup};

/// Default interference cutoff: interferers more than this many nats below
/// the strongest one are left out of the sum.
pub const DEFAULT_CUTOFF_NATS: f64 = 46.0;

/// Realizations with fewer than two base stations are redrawn; more than
/// this fraction of redraws is an error.
pub const MAX_REDRAW_RATE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default = "defaults::outer")]
    pub outer_region_km: f64,
    #[serde(default = "defaults::inner")]
    pub inner_region_km: f64,
    #[serde(default = "defaults::realizations")]
    pub realizations: usize,
    #[serde(default = "defaults::users")]
    pub users_per_realization: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Add the noise power of the network parameters to the interference.
    #[serde(default)]
    pub include_noise: bool,
    /// Relative interference cutoff in nats; `None` sums every base station
    /// in the region.
    #[serde(default = "defaults::cutoff")]
    pub cutoff_nats: Option<f64>,
}

mod defaults {
    pub fn outer() -> f64 {
        20.0
    }
    pub fn inner() -> f64 {
        4.0
    }
    pub fn realizations() -> usize {
        10_000
    }
    pub fn users() -> usize {
        20
    }
    pub fn cutoff() -> Option<f64> {
        Some(super::DEFAULT_CUTOFF_NATS)
    }
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            outer_region_km: defaults::outer(),
            inner_region_km: defaults::inner(),
            realizations: defaults::realizations(),
            users_per_realization: defaults::users(),
            master_seed: 0,
            include_noise: false,
            cutoff_nats: defaults::cutoff(),
        }
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.outer_region_km > 0.0 && self.outer_region_km.is_finite(), || {
            format!("outer region must be positive, got {} km", self.outer_region_km)
        })?;
        ensure(self.inner_region_km > 0.0 && self.inner_region_km <= self.outer_region_km, || {
            format!(
                "inner region must lie in (0, {}] km, got {}",
                self.outer_region_km, self.inner_region_km
            )
        })?;
        ensure(self.realizations >= 1, || "at least one realization is needed".into())?;
        ensure(self.users_per_realization >= 1, || "at least one user per realization is needed".into())?;
        if let Some(c) = self.cutoff_nats {
            ensure(c > 0.0 && c.is_finite(), || format!("cutoff must be positive, got {c}"))?;
        }
        Ok(())
    }
}

/// Everything needed to reproduce a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub spec: SimulationSpec,
    /// BS/m².
    pub lambda: f64,
    pub model: PathLossModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
}

/// Simulated SIR (or SINR) values, kept as natural logarithms since very
/// sparse or strongly attenuating networks exceed the range of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SirSampleSet {
    pub ln_sir: Vec<f64>,
    pub serving_distance_m: Vec<f64>,
    /// Base stations dropped in each realization.
    pub bs_counts: Vec<u64>,
    pub redraws: u64,
    pub warnings: Vec<String>,
    pub meta: Option<SampleMeta>,
}

impl SirSampleSet {
    /// A bare sample set from linear SIR values.
    pub fn from_linear(sir: &[f64]) -> Result<Self> {
        let mut ln_sir = Vec::with_capacity(sir.len());
        for &s in sir {
            ensure(s > 0.0 && s.is_finite(), || format!("SIR samples must be positive and finite, got {s}"))?;
            ln_sir.push(s.ln());
        }
        Ok(SirSampleSet {
            ln_sir,
            serving_distance_m: Vec::new(),
            bs_counts: Vec::new(),
            redraws: 0,
            warnings: Vec::new(),
            meta: None,
        })
    }

    pub fn len(&self) -> usize {
        self.ln_sir.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_sir.is_empty()
    }

    pub fn sir_db(&self) -> impl Iterator<Item = f64> + '_ {
        self.ln_sir.iter().map(|x| 10.0 * x / std::f64::consts::LN_10)
    }
}

/// Simulates the stretched-exponential network described by `params`.
pub fn simulate(spec: &SimulationSpec, params: &NetworkParams) -> Result<SirSampleSet> {
    params.validate()?;
    let noise = if spec.include_noise {
        Some(params.n0.filter(|&n| n > 0.0).ok_or_else(|| {
            Error::Validation("include_noise is set but the network parameters carry no noise power".into())
        })?)
    } else {
        None
    };
    simulate_model(spec, params.lambda, &params.path_loss(), noise)
}

/// Simulates a network whose links attenuate according to `model`.
pub fn simulate_model(
    spec: &SimulationSpec,
    lambda: f64,
    model: &PathLossModel,
    noise: Option<f64>,
) -> Result<SirSampleSet> {
    spec.validate()?;
    model.validate()?;
    ensure(lambda > 0.0 && lambda.is_finite(), || format!("density must be positive, got {lambda}"))?;
    if let Some(n) = noise {
        ensure(n > 0.0 && n.is_finite(), || format!("noise power must be positive, got {n}"))?;
    }
    let outer_half = 500.0 * spec.outer_region_km;
    let mean_count = lambda * (2.0 * outer_half).powi(2);
    let mut warnings = Vec::new();
    if mean_count < 1.0 {
        return Err(Error::Validation(format!(
            "expected {mean_count:.3} base stations in the region; at least one is needed"
        )));
    }
    if mean_count < 10.0 {
        warnings.push(format!("only {mean_count:.2} base stations expected per realization"));
    }
    let setup = Setup {
        model,
        lambda,
        outer_half,
        inner_half: 500.0 * spec.inner_region_km,
        users: spec.users_per_realization,
        seed: spec.master_seed,
        ln_noise: noise.map(f64::ln),
        cutoff: spec.cutoff_nats,
        max_attempts: 1000,
    };
    let runs: Vec<_> = (0..spec.realizations as u64)
        .into_par_iter()
        .map(|i| run_realization(&setup, i))
        .collect::<Result<_>>()?;

    let redraws: u64 = runs.iter().map(|r| u64::from(r.redraws)).sum();
    let rate = redraws as f64 / spec.realizations as f64;
    if rate > MAX_REDRAW_RATE {
        return Err(Error::Simulation(format!(
            "{redraws} of {} realizations had to be redrawn for lack of base stations",
            spec.realizations
        )));
    }
    let mut set = SirSampleSet {
        ln_sir: Vec::with_capacity(spec.realizations * spec.users_per_realization),
        serving_distance_m: Vec::with_capacity(spec.realizations * spec.users_per_realization),
        bs_counts: Vec::with_capacity(spec.realizations),
        redraws,
        warnings,
        meta: Some(SampleMeta {
            spec: spec.clone(),
            lambda,
            model: model.clone(),
            noise,
        }),
    };
    for r in runs {
        set.ln_sir.extend(r.ln_sir);
        set.serving_distance_m.extend(r.serving_distance);
        set.bs_counts.push(r.bs_count);
    }
    Ok(set)
}

/// Fraction of samples with SIR ≥ θ, with its binomial standard error.
pub fn empirical_coverage(samples: &SirSampleSet, theta: SirThreshold) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let hits = samples.ln_sir.iter().filter(|&&x| x >= theta.ln()).count() as f64;
    let p = hits / n;
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

/// `λ log₂(1+θ) P̂(SIR ≥ θ)` with its standard error.
pub fn empirical_potential_throughput(samples: &SirSampleSet, lambda: f64, theta: SirThreshold) -> Result<(f64, f64)> {
    let (p, se) = empirical_coverage(samples, theta)?;
    let rate = lambda * theta.ln_1p() / std::f64::consts::LN_2;
    Ok((rate * p, rate * se))
}

/// `λ · mean(log₂(1 + SIR))` with the standard error of the mean.
pub fn empirical_ase(samples: &SirSampleSet, lambda: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let bits: Vec<f64> = samples
        .ln_sir
        .iter()
        .map(|&x| ln_1p_exp(x) / std::f64::consts::LN_2)
        .collect();
    let mean = bits.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        bits.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((lambda * mean, lambda * (var / n).sqrt()))
}

const SAMPLES_MAGIC: &str = "# stretchnet samples v1";

/// Writes one sample per line as `sir_db,serving_distance_m`, preceded by
/// comment lines carrying the simulation snapshot.
pub fn write_samples_csv<W: Write>(samples: &SirSampleSet, mut out: W) -> Result<()> {
    writeln!(out, "{SAMPLES_MAGIC}")?;
    if let Some(meta) = &samples.meta {
        writeln!(out, "# meta {}", serde_json::to_string(meta)?)?;
    }
    writeln!(out, "# redraws {}", samples.redraws)?;
    writeln!(out, "sir_db,serving_distance_m")?;
    let with_distance = samples.serving_distance_m.len() == samples.len();
    for (i, db) in samples.sir_db().enumerate() {
        if with_distance {
            writeln!(out, "{db:.11e},{:.11e}", samples.serving_distance_m[i])?;
        } else {
            writeln!(out, "{db:.11e},")?;
        }
    }
    Ok(())
}

/// Reads the format produced by [`write_samples_csv`].
pub fn read_samples_csv<R: BufRead>(input: R) -> Result<SirSampleSet> {
    let mut meta = None;
    let mut redraws = 0;
    let mut ln_sir = Vec::new();
    let mut distances = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let at = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(json) = comment.strip_prefix("meta ") {
                let m: SampleMeta = serde_json::from_str(json).map_err(|e| at(format!("bad metadata: {e}")))?;
                m.spec.validate()?;
                m.model.validate()?;
                meta = Some(m);
            } else if let Some(n) = comment.strip_prefix("redraws ") {
                redraws = n.trim().parse().map_err(|e| at(format!("bad redraw count: {e}")))?;
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line.trim() != "sir_db,serving_distance_m" {
                return Err(at(format!("expected header 'sir_db,serving_distance_m', got '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let (db, dist) = line.split_once(',').ok_or_else(|| at("expected two columns".into()))?;
        let db: f64 = db.trim().parse().map_err(|e| at(format!("bad SIR: {e}")))?;
        if !db.is_finite() {
            return Err(at("SIR must be finite".into()));
        }
        ln_sir.push(db * std::f64::consts::LN_10 / 10.0);
        let dist = dist.trim();
        if !dist.is_empty() {
            let d: f64 = dist.parse().map_err(|e| at(format!("bad distance: {e}")))?;
            if !(d >= 0.0 && d.is_finite()) {
                return Err(at(format!("distance must be non-negative, got {d}")));
            }
            distances.push(d);
        }
    }
    if !header_seen {
        return Err(Error::Parse("missing header line".into()));
    }
    if !distances.is_empty() && distances.len() != ln_sir.len() {
        return Err(Error::Parse("serving distances given for only some samples".into()));
    }
    Ok(SirSampleSet {
        ln_sir,
        serving_distance_m: distances,
        bs_counts: Vec::new(),
        redraws,
        warnings: Vec::new(),
        meta,
    })
}
