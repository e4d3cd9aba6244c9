//! Least-squares fitting of path-loss families to distance/gain
//! measurements, scored by the RMS of dB residuals.

mod optimize;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::pathloss::{Family, PathLossModel};

use optimize::{fit_simplex, fit_two_slope, SearchOptions};

/// Largest `n` tried when β is restricted to `2/(n+1)`.
pub const MAX_POLYLOG_ORDER: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub r_m: f64,
    pub gain_db: f64,
}

/// Distance/gain pairs, kept sorted by distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDataset {
    points: Vec<Measurement>,
    source: String,
}

impl MeasurementDataset {
    pub fn new(mut points: Vec<Measurement>, source: impl Into<String>) -> Result<Self> {
        ensure(!points.is_empty(), || "dataset has no points".into())?;
        for p in &points {
            ensure(p.r_m > 0.0 && p.r_m.is_finite(), || {
                format!("distances must be positive and finite, got {}", p.r_m)
            })?;
            ensure(p.gain_db.is_finite(), || format!("gain at {} m is not finite", p.r_m))?;
        }
        points.sort_by(|a, b| a.r_m.total_cmp(&b.r_m).then(a.gain_db.total_cmp(&b.gain_db)));
        Ok(MeasurementDataset {
            points,
            source: source.into(),
        })
    }

    /// Noiseless samples of `model` at the given distances.
    pub fn from_model(model: &PathLossModel, distances: &[f64]) -> Result<Self> {
        model.validate()?;
        let points = distances
            .iter()
            .map(|&r| Ok(Measurement { r_m: r, gain_db: model.gain_db(r)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, format!("synthetic {}", model.to_json()))
    }

    pub fn points(&self) -> &[Measurement] {
        &self.points
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.points.iter().map(|p| p.r_m).collect();
        d.dedup();
        d
    }

    fn distance_range(&self) -> (f64, f64) {
        (self.points[0].r_m, self.points[self.points.len() - 1].r_m)
    }

    fn gain_variance(&self) -> f64 {
        let n = self.points.len() as f64;
        let mean = self.points.iter().map(|p| p.gain_db).sum::<f64>() / n;
        self.points.iter().map(|p| (p.gain_db - mean).powi(2)).sum::<f64>() / n
    }

    /// Reads `r_m,gain_db` rows; lines starting with `#` are comments, and
    /// `# source: ...` names the dataset.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let source = text
            .lines()
            .filter_map(|l| l.trim().strip_prefix('#'))
            .find_map(|c| c.trim().strip_prefix("source:"))
            .map_or_else(String::new, |s| s.trim().to_string());
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r_m", "gain_db"] {
            return Err(Error::Parse(format!(
                "expected header 'r_m,gain_db', got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for (i, row) in reader.deserialize::<Measurement>().enumerate() {
            let p = row.map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?;
            points.push(p);
        }
        if points.is_empty() {
            return Err(Error::Parse("dataset has no rows".into()));
        }
        Self::new(points, source).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if !self.source.is_empty() {
            writeln!(out, "# source: {}", self.source.replace(['\n', '\r'], " "))?;
        }
        writeln!(out, "r_m,gain_db")?;
        for p in &self.points {
            writeln!(out, "{:.11e},{:.11e}", p.r_m, p.gain_db)?;
        }
        Ok(())
    }
}

/// Root-mean-square of the dB residuals between data and model.
pub fn rms_error(data: &MeasurementDataset, model: &PathLossModel) -> Result<f64> {
    model.validate()?;
    let mut sum = 0.0;
    for p in data.points() {
        sum += (p.gain_db - model.gain_db(p.r_m)?).powi(2);
    }
    Ok((sum / data.points().len() as f64).sqrt())
}

/// Restriction on the exponent β of the families that have one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitConstraint {
    FixedBeta(f64),
    /// β = 2/(n+1) for some integer `0 ≤ n ≤ MAX_POLYLOG_ORDER`.
    PolylogBeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: u64,
    pub constraint: Option<FitConstraint>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 16,
            seed: 0,
            max_iterations: 4000,
            constraint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: PathLossModel,
    pub rms_db: f64,
    pub iterations: u64,
    /// False when the best run stopped at the iteration limit; the model is
    /// then the best point found.
    pub converged: bool,
}

fn has_beta(family: Family) -> bool {
    matches!(family, Family::PL1 | Family::PL2 | Family::PL10)
}

/// Fits `family` to `data` by minimising the RMS dB error.
pub fn fit(data: &MeasurementDataset, family: Family, options: &FitOptions) -> Result<FitResult> {
    ensure(options.starts >= 1, || "at least one start is needed".into())?;
    ensure(options.max_iterations >= 1, || "iteration limit must be positive".into())?;
    let fixed = match options.constraint {
        Some(_) if !has_beta(family) => {
            return Err(Error::Validation(format!("{family} has no β to constrain")));
        }
        Some(FitConstraint::FixedBeta(b)) => {
            ensure(b > 0.0 && b.is_finite(), || format!("fixed β must be positive, got {b}"))?;
            1
        }
        Some(FitConstraint::PolylogBeta) => 1,
        None => 0,
    };
    let needed = family.parameter_count() - fixed;
    let distinct = data.distinct_distances().len();
    if distinct < needed {
        return Err(Error::Identifiability(format!(
            "{family} has {needed} free parameters but the data has {distinct} distinct distance(s)"
        )));
    }
    let search = SearchOptions {
        starts: options.starts,
        seed: options.seed,
        max_iterations: options.max_iterations,
    };
    match (family, options.constraint) {
        (Family::PL6, _) => fit_two_slope(data),
        (_, None) => fit_simplex(data, family, None, &search),
        (_, Some(FitConstraint::FixedBeta(b))) => fit_simplex(data, family, Some(b), &search),
        (_, Some(FitConstraint::PolylogBeta)) => {
            let mut best: Option<FitResult> = None;
            let mut iterations = 0;
            for n in 0..=MAX_POLYLOG_ORDER {
                let r = fit_simplex(data, family, Some(2.0 / f64::from(n + 1)), &search)?;
                iterations += r.iterations;
                if best.as_ref().is_none_or(|b| r.rms_db < b.rms_db) {
                    best = Some(r);
                }
            }
            let mut best = best.expect("at least one order tried");
            best.iterations = iterations;
            Ok(best)
        }
    }
}

/// One family's entry in a fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub source: String,
    pub rows: Vec<FitRow>,
}

/// Fits every family and ranks them by RMS error. Families that fail are
/// kept, after the successful ones, with the error as an annotation.
pub fn fit_report(data: &MeasurementDataset, families: &[Family], options: &FitOptions) -> FitReport {
    let mut rows: Vec<FitRow> = families
        .iter()
        .map(|&family| match fit(data, family, options) {
            Ok(r) => FitRow {
                family,
                result: Some(r),
                error: None,
            },
            Err(e) => FitRow {
                family,
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let key = |row: &FitRow| row.result.as_ref().map_or(f64::INFINITY, |r| r.rms_db);
    rows.sort_by(|a, b| key(a).total_cmp(&key(b)));
    FitReport {
        source: data.source().to_string(),
        rows,
    }
}

impl FitReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "family", "rms_db", "converged", "iterations", "model", "error"])?;
        for (i, row) in self.rows.iter().enumerate() {
            let rank = (i + 1).to_string();
            let record = match &row.result {
                Some(r) => [
                    rank,
                    row.family.to_string(),
                    format!("{:.6}", r.rms_db),
                    r.converged.to_string(),
                    r.iterations.to_string(),
                    r.model.to_json(),
                    String::new(),
                ],
                None => [
                    rank,
                    row.family.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    row.error.clone().unwrap_or_default(),
                ],
            };
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
