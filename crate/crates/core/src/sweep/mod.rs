//! Parameter sweeps, optimal-threshold search and figure data export.
//!
//! At this boundary densities are in BS/km² and thresholds in dB; they are
//! converted once to BS/m² and linear thresholds before evaluation.

mod config;
mod curves;
mod figure;

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    ase, coverage, potential_throughput, CoverageMethod, CurveMethod, CurvePoint, Metric, MetricCurve, SirThreshold,
};
use crate::error::{ensure, Error, Result};
use crate::montecarlo::{empirical_ase, empirical_coverage, empirical_potential_throughput, simulate, SimulationSpec};
use crate::pathloss::NetworkParams;
use crate::quadrature::{golden_section_max, QuadConfig};

pub use config::{Config, NetworkConfig, CONFIG_SCHEMA_VERSION};
pub use curves::{read_curves_csv, write_curves_csv};
pub use figure::{
    reproduce_figure, CurveSummary, FigureId, FigureMeta, FigureOptions, FigureOutput, FIGURE_SCHEMA_VERSION,
};

/// BS/km² to BS/m².
pub const PER_KM2: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        GridSpec {
            min,
            max,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        GridSpec {
            min,
            max,
            points,
            spacing: Spacing::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.min.is_finite() && self.max.is_finite() && self.min < self.max, || {
            format!("grid needs min < max, got [{}, {}]", self.min, self.max)
        })?;
        ensure(self.points >= 2, || format!("grid needs at least 2 points, got {}", self.points))?;
        if self.spacing == Spacing::Log {
            ensure(self.min > 0.0, || format!("log grid needs a positive minimum, got {}", self.min))?;
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        let mut v: Vec<f64> = (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect();
        // pin the ends exactly
        v[0] = self.min;
        v[self.points - 1] = self.max;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMetric {
    Coverage,
    Throughput,
    Ase,
}

impl SweepMetric {
    pub fn metric(self) -> Metric {
        match self {
            SweepMetric::Coverage => Metric::Coverage,
            SweepMetric::Throughput => Metric::PotentialThroughput,
            SweepMetric::Ase => Metric::Ase,
        }
    }
}

/// The swept quantity: density in BS/km² or threshold in dB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    Lambda,
    Theta,
}

impl Abscissa {
    pub fn column(self) -> &'static str {
        match self {
            Abscissa::Lambda => "lambda_bs_km2",
            Abscissa::Theta => "theta_db",
        }
    }
}

/// Fully specified network at the boundary units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub lambda_bs_km2: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
}

impl NetworkSpec {
    pub fn params(&self) -> Result<NetworkParams> {
        let p = NetworkParams::new(self.lambda_bs_km2 * PER_KM2, self.alpha, self.beta)?;
        match self.n0 {
            Some(n) if n > 0.0 => p.with_noise(n),
            Some(n) if n < 0.0 || !n.is_finite() => Err(Error::Validation(format!("noise power must be >= 0, got {n}"))),
            _ => Ok(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub metric: SweepMetric,
    pub abscissa: Abscissa,
    pub grid: GridSpec,
    /// The density is ignored when sweeping over it.
    pub network: NetworkSpec,
    /// Threshold in dB, ignored when sweeping over it.
    #[serde(default = "default_theta_db")]
    pub theta_db: f64,
    pub methods: Vec<CurveMethod>,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default)]
    pub quadrature: QuadConfig,
}

fn default_theta_db() -> f64 {
    5.0
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        ensure(!self.methods.is_empty(), || "a sweep needs at least one method".into())?;
        ensure(self.theta_db.is_finite(), || "threshold must be finite".into())?;
        if self.metric == SweepMetric::Ase && self.abscissa == Abscissa::Theta {
            return Err(Error::Validation("the ASE does not depend on the threshold".into()));
        }
        let params = self.params_at(self.grid.min)?;
        for m in &self.methods {
            match m {
                CurveMethod::Analytic(c) => c.check(&params)?,
                CurveMethod::MonteCarlo => self.simulation.validate()?,
                other => return Err(Error::Validation(format!("method '{other}' cannot drive a sweep"))),
            }
        }
        Ok(())
    }

    fn params_at(&self, x: f64) -> Result<NetworkParams> {
        let mut net = self.network;
        if self.abscissa == Abscissa::Lambda {
            net.lambda_bs_km2 = x;
        }
        net.params()
    }

    fn theta_at(&self, x: f64) -> Result<SirThreshold> {
        SirThreshold::from_db(if self.abscissa == Abscissa::Theta { x } else { self.theta_db })
    }
}

fn analytic_point(spec: &SweepSpec, method: CoverageMethod, x: f64) -> Result<(f64, f64)> {
    let params = spec.params_at(x)?;
    let cfg = &spec.quadrature;
    let e = match spec.metric {
        SweepMetric::Coverage => coverage(&params, spec.theta_at(x)?, Some(method), cfg)?,
        SweepMetric::Throughput => potential_throughput(&params, spec.theta_at(x)?, Some(method), cfg)?,
        SweepMetric::Ase => ase(&params, Some(method), cfg)?,
    };
    Ok((e.value, e.abs_error))
}

fn simulation_for(spec: &SweepSpec, params: &NetworkParams) -> SimulationSpec {
    SimulationSpec {
        include_noise: params.has_noise(),
        ..spec.simulation.clone()
    }
}

fn monte_carlo_points(spec: &SweepSpec, xs: &[f64]) -> Vec<CurvePoint> {
    let point = |x: f64, r: Result<(f64, f64)>| match r {
        Ok((y, se)) => CurvePoint::value(x, y, se),
        Err(e) => CurvePoint::gap(x, e.to_string()),
    };
    let metric_of = |set: &_, params: &NetworkParams, x: f64| -> Result<(f64, f64)> {
        match spec.metric {
            SweepMetric::Coverage => empirical_coverage(set, spec.theta_at(x)?),
            SweepMetric::Throughput => empirical_potential_throughput(set, params.lambda, spec.theta_at(x)?),
            SweepMetric::Ase => empirical_ase(set, params.lambda),
        }
    };
    match spec.abscissa {
        // one network serves every threshold
        Abscissa::Theta => {
            let run = spec.params_at(xs[0]).and_then(|p| Ok((simulate(&simulation_for(spec, &p), &p)?, p)));
            match run {
                Ok((set, params)) => xs.iter().map(|&x| point(x, metric_of(&set, &params, x))).collect(),
                Err(e) => xs.iter().map(|&x| CurvePoint::gap(x, e.to_string())).collect(),
            }
        }
        Abscissa::Lambda => xs
            .iter()
            .map(|&x| {
                let r = spec.params_at(x).and_then(|p| {
                    let set = simulate(&simulation_for(spec, &p), &p)?;
                    metric_of(&set, &p, x)
                });
                point(x, r)
            })
            .collect(),
    }
}

/// One curve per method over the same grid. Points that fail to evaluate
/// become gaps carrying the reason.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<MetricCurve>> {
    spec.validate()?;
    let xs = spec.grid.values();
    let base = spec.params_at(xs[0])?;
    let fixed_theta = match spec.abscissa {
        Abscissa::Lambda if spec.metric != SweepMetric::Ase => Some(spec.theta_at(xs[0])?),
        _ => None,
    };
    let fixed_params = (spec.abscissa == Abscissa::Theta).then_some(base);
    let mut curves = Vec::with_capacity(spec.methods.len());
    for method in &spec.methods {
        let points = match method {
            CurveMethod::Analytic(m) => xs
                .par_iter()
                .map(|&x| match analytic_point(spec, *m, x) {
                    Ok((y, err)) => CurvePoint::value(x, y, err),
                    Err(e) => CurvePoint::gap(x, e.to_string()),
                })
                .collect(),
            CurveMethod::MonteCarlo => monte_carlo_points(spec, &xs),
            _ => unreachable!("rejected by validation"),
        };
        curves.push(MetricCurve {
            label: method.to_string(),
            metric: spec.metric.metric(),
            method: method.clone(),
            abscissa: spec.abscissa.column().to_string(),
            points,
            params: fixed_params,
            theta: fixed_theta,
        });
    }
    Ok(curves)
}

/// Threshold grid for [`optimal_threshold`], in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSearch {
    pub min_db: f64,
    pub max_db: f64,
    pub points: usize,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        ThresholdSearch {
            min_db: -20.0,
            max_db: 30.0,
            points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptimum {
    pub theta: SirThreshold,
    /// Potential throughput at the optimum, bps/Hz/m².
    pub throughput: f64,
    pub coverage: f64,
    /// True when the best grid point is an end of the search range.
    pub at_boundary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Threshold maximising the potential throughput at fixed density: grid
/// search in dB, then golden-section refinement between the neighbours of
/// the best grid point.
pub fn optimal_threshold(
    params: &NetworkParams,
    search: &ThresholdSearch,
    method: Option<CoverageMethod>,
    cfg: &QuadConfig,
) -> Result<ThresholdOptimum> {
    GridSpec::linear(search.min_db, search.max_db, search.points).validate()?;
    if let Some(m) = method {
        m.check(params)?;
    }
    let rate = |db: f64| -> Result<f64> {
        Ok(potential_throughput(params, SirThreshold::from_db(db)?, method, cfg)?.value)
    };
    let xs = GridSpec::linear(search.min_db, search.max_db, search.points).values();
    let values = xs.par_iter().map(|&x| rate(x)).collect::<Result<Vec<f64>>>()?;
    let best = (0..xs.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let failure = RefCell::new(None);
    let (lo, hi) = (xs[best.saturating_sub(1)], xs[(best + 1).min(xs.len() - 1)]);
    let (x, fx) = golden_section_max(
        |db| {
            rate(db).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            })
        },
        lo,
        hi,
        1e-9 * (search.max_db - search.min_db),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (db, throughput) = if fx >= values[best] { (x, fx) } else { (xs[best], values[best]) };
    let theta = SirThreshold::from_db(db)?;
    let at_boundary = best == 0 || best == xs.len() - 1;
    let warning = at_boundary.then(|| {
        format!(
            "maximum at the edge of the search range [{}, {}] dB; the optimum may lie outside it",
            search.min_db, search.max_db
        )
    });
    Ok(ThresholdOptimum {
        theta,
        throughput,
        coverage: coverage(params, theta, method, cfg)?.value,
        at_boundary,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn fig3_spec(methods: Vec<CurveMethod>) -> SweepSpec {
        SweepSpec {
            metric: SweepMetric::Coverage,
            abscissa: Abscissa::Theta,
            grid: GridSpec::linear(-10.0, 20.0, 7),
            network: NetworkSpec {
                lambda_bs_km2: 500.0,
                alpha: 1.037,
                beta: 0.5,
                n0: None,
            },
            theta_db: 5.0,
            methods,
            simulation: SimulationSpec {
                outer_region_km: 4.0,
                inner_region_km: 1.0,
                realizations: 20,
                ..Default::default()
            },
            quadrature: QuadConfig::default(),
        }
    }

    #[test]
    fn grids() {
        let g = GridSpec::log(1.0, 100.0, 3).values();
        assert_eq!((g[0], g[2]), (1.0, 100.0));
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(GridSpec::linear(0.0, 1.0, 5).values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(GridSpec::linear(1.0, 1.0, 5).validate().is_err());
        assert!(GridSpec::linear(0.0, 1.0, 1).validate().is_err());
        assert!(GridSpec::log(0.0, 1.0, 3).validate().is_err());
    }

    #[test]
    fn lower_bound_sits_under_exact_coverage() {
        let spec = fig3_spec(vec![
            CurveMethod::Analytic(CoverageMethod::PolylogCompact),
            CurveMethod::Analytic(CoverageMethod::LowerBoundJensen),
        ]);
        let curves = run_sweep(&spec).unwrap();
        assert_eq!(curves.len(), 2);
        for (e, l) in curves[0].points.iter().zip(&curves[1].points) {
            assert_eq!(e.x, l.x);
            assert!(l.y.unwrap() <= e.y.unwrap() + 1e-12);
        }
        // the bound follows the trend of the exact curve
        for c in &curves {
            let ys: Vec<f64> = c.points.iter().map(|p| p.y.unwrap()).collect();
            assert!(ys.windows(2).all(|w| w[1] <= w[0]), "{}", c.label);
            c.validate().unwrap();
            assert_eq!(c.abscissa, "theta_db");
        }
    }

    #[test]
    fn monte_carlo_curve_carries_standard_errors() {
        let curves = run_sweep(&fig3_spec(vec![CurveMethod::MonteCarlo])).unwrap();
        assert!(curves[0].points.iter().all(|p| p.err.is_some() && p.y.is_some()));
        let ys: Vec<f64> = curves[0].points.iter().map(|p| p.y.unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn throughput_over_density_has_interior_maximum() {
        for beta in [2.0, 1.0, 2.0 / 3.0, 0.5] {
            let spec = SweepSpec {
                metric: SweepMetric::Throughput,
                abscissa: Abscissa::Lambda,
                grid: GridSpec::log(1.0, 1e5, 21),
                network: NetworkSpec {
                    lambda_bs_km2: 1.0,
                    alpha: 1.037 * 1000f64.powf(0.5 - beta),
                    beta,
                    n0: None,
                },
                theta_db: 5.0,
                methods: vec![CurveMethod::Analytic(CoverageMethod::PolylogCompact)],
                simulation: SimulationSpec::default(),
                quadrature: QuadConfig::default(),
            };
            let curve = &run_sweep(&spec).unwrap()[0];
            assert_eq!(curve.gaps(), 0);
            let best = curve.argmax().unwrap().x;
            assert!(best > 1.0 && best < 1e5, "beta={beta}: {best}");
        }
    }

    #[test]
    fn incompatible_methods_are_rejected() {
        let mut spec = fig3_spec(vec![CurveMethod::Analytic(CoverageMethod::ClosedBeta1)]);
        assert!(matches!(run_sweep(&spec), Err(Error::Precondition(_))));
        spec.methods = vec![CurveMethod::Measured];
        assert!(matches!(run_sweep(&spec), Err(Error::Validation(_))));
        spec.methods = vec![];
        assert!(run_sweep(&spec).is_err());
        spec.methods = vec![CurveMethod::Analytic(CoverageMethod::GeneralQuadrature)];
        spec.metric = SweepMetric::Ase;
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn failed_points_become_gaps() {
        let mut spec = fig3_spec(vec![CurveMethod::Analytic(CoverageMethod::GeneralQuadrature)]);
        spec.quadrature = QuadConfig {
            abs_tol: 0.0,
            rel_tol: 1e-300,
            max_subdivisions: 2,
        };
        let curve = &run_sweep(&spec).unwrap()[0];
        assert!(curve.gaps() > 0);
        assert!(curve.points.iter().filter(|p| p.y.is_none()).all(|p| p.note.is_some()));
    }

    #[test]
    fn optimal_threshold_beta2_matches_first_order_condition() {
        let cfg = QuadConfig::default();
        for (lambda, alpha) in [(1e-4, 1e-3), (3e-5, 2e-4)] {
            let p = NetworkParams::new(lambda, alpha, 2.0).unwrap();
            let opt = optimal_threshold(&p, &ThresholdSearch::default(), None, &cfg).unwrap();
            // golden-section reference on λ y e^(-πλy/α) / ln 2 over y = ln(1+θ)
            let (y, r) = golden_section_max(|y| lambda * y * (-PI * lambda * y / alpha).exp() / LN_2, 1e-3, 50.0, 1e-12);
            assert!((opt.theta.ln_1p() - y).abs() < 1e-6 * y, "{} vs {y}", opt.theta.ln_1p());
            assert!((opt.throughput - r).abs() < 1e-9 * r);
            assert!((y - alpha / (PI * lambda)).abs() < 1e-6 * y);
            assert!(!opt.at_boundary && opt.warning.is_none());
        }
    }

    #[test]
    fn optimal_threshold_decreases_with_density() {
        let cfg = QuadConfig::default();
        let search = ThresholdSearch::default();
        let mut prev = f64::INFINITY;
        for lambda in [100.0, 200.0, 400.0, 800.0, 1200.0, 2000.0] {
            let p = NetworkParams::new(lambda * PER_KM2, 1.037, 0.5).unwrap();
            let opt = optimal_threshold(&p, &search, None, &cfg).unwrap();
            assert!(opt.theta.db() <= prev + 1e-9, "{lambda}: {} after {prev}", opt.theta.db());
            let fixed = potential_throughput(&p, SirThreshold::from_db(5.0).unwrap(), None, &cfg).unwrap().value;
            assert!(opt.throughput >= fixed);
            prev = opt.theta.db();
        }
    }

    #[test]
    fn optimal_threshold_flags_range_edges() {
        let p = NetworkParams::new(1e-4, 1e-3, 2.0).unwrap();
        let search = ThresholdSearch {
            min_db: 20.0,
            max_db: 30.0,
            points: 11,
        };
        let opt = optimal_threshold(&p, &search, None, &QuadConfig::default()).unwrap();
        assert!(opt.at_boundary && opt.warning.is_some());
        assert!((opt.theta.db() - 20.0).abs() < 1e-6);
    }
}
