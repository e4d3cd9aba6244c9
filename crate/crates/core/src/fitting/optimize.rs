//! Per-family parameterisations and the multi-start simplex search.

use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{FitResult, MeasurementDataset};
use crate::error::{Error, Result};
use crate::pathloss::{Family, PathLossModel, DB_PER_NEPER};

/// One optimisation coordinate and how it maps to a model parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Coord {
    LnAlpha,
    LnBeta,
    /// `η = |x|`, for exponents that may vanish.
    AbsEta,
    LnEta,
    LnSwitch,
}

impl Coord {
    fn decode(self, x: f64) -> f64 {
        match self {
            Coord::AbsEta => x.abs(),
            _ => x.exp(),
        }
    }

    fn start_box(self, r_min: f64, r_max: f64) -> (f64, f64) {
        match self {
            Coord::LnAlpha => (1e-5f64.ln(), 10f64.ln()),
            Coord::LnBeta => (0.1f64.ln(), 2f64.ln()),
            Coord::AbsEta => (0.0, 2.5),
            Coord::LnEta => (0.5f64.ln(), 6f64.ln()),
            Coord::LnSwitch => (r_min.ln(), r_max.ln()),
        }
    }

    fn centre(self, r_min: f64, r_max: f64) -> f64 {
        match self {
            Coord::LnAlpha => 0.1f64.ln(),
            Coord::LnBeta => 0.5f64.ln(),
            Coord::AbsEta => 1.0,
            Coord::LnEta => 2f64.ln(),
            Coord::LnSwitch => 0.5 * (r_min.ln() + r_max.ln()),
        }
    }
}

/// Coordinates searched for `family`, with β removed when it is fixed.
fn layout(family: Family, fixed_beta: Option<f64>) -> Vec<Coord> {
    use Coord::*;
    let mut coords = match family {
        Family::PL1 => vec![LnAlpha, LnBeta],
        Family::PL2 => vec![LnAlpha, LnBeta, AbsEta],
        Family::PL3 => vec![LnAlpha, LnEta],
        Family::PL4 | Family::PL5 => vec![LnAlpha],
        Family::PL7 | Family::PL8 | Family::PL9 => vec![LnEta],
        Family::PL10 => vec![LnAlpha, LnBeta, LnEta, LnSwitch],
        Family::PL6 => unreachable!("PL6 is fitted by breakpoint scan"),
    };
    if fixed_beta.is_some() {
        coords.retain(|&c| c != LnBeta);
    }
    coords
}

/// Model with unit gain constant for the coordinates `x`.
fn build(family: Family, coords: &[Coord], x: &[f64], fixed_beta: Option<f64>) -> PathLossModel {
    let get = |c: Coord| coords.iter().position(|&k| k == c).map(|i| c.decode(x[i]));
    let alpha = get(Coord::LnAlpha).unwrap_or(1.0);
    let beta = fixed_beta.or_else(|| get(Coord::LnBeta)).unwrap_or(1.0);
    let eta = get(Coord::LnEta).or_else(|| get(Coord::AbsEta)).unwrap_or(0.0);
    match family {
        Family::PL1 => PathLossModel::StretchedExp { a: 1.0, alpha, beta },
        Family::PL2 => PathLossModel::StretchedExpPower { a: 1.0, alpha, beta, eta },
        Family::PL3 => PathLossModel::ExpPower { a: 1.0, alpha, eta },
        Family::PL4 => PathLossModel::ExpSquare { a: 1.0, alpha },
        Family::PL5 => PathLossModel::ExpSquareMin { a: 1.0, alpha },
        Family::PL7 => PathLossModel::OffsetPower { a: 1.0, eta },
        Family::PL8 => PathLossModel::BoundedPower { a: 1.0, eta },
        Family::PL9 => PathLossModel::Power { a: 1.0, eta },
        Family::PL10 => PathLossModel::Hybrid {
            alpha,
            beta,
            eta,
            r_switch: get(Coord::LnSwitch).unwrap_or(1.0),
        },
        Family::PL6 => unreachable!("PL6 is fitted by breakpoint scan"),
    }
}

fn with_gain_constant(model: PathLossModel, a: f64) -> PathLossModel {
    use PathLossModel::*;
    match model {
        StretchedExp { alpha, beta, .. } => StretchedExp { a, alpha, beta },
        StretchedExpPower { alpha, beta, eta, .. } => StretchedExpPower { a, alpha, beta, eta },
        ExpPower { alpha, eta, .. } => ExpPower { a, alpha, eta },
        ExpSquare { alpha, .. } => ExpSquare { a, alpha },
        ExpSquareMin { alpha, .. } => ExpSquareMin { a, alpha },
        MultiSlope { eta, breakpoints, .. } => MultiSlope { a, eta, breakpoints },
        OffsetPower { eta, .. } => OffsetPower { a, eta },
        BoundedPower { eta, .. } => BoundedPower { a, eta },
        Power { eta, .. } => Power { a, eta },
        Hybrid { .. } => model,
    }
}

/// Mean squared dB residual, with the gain constant set to its optimum
/// when the family has one. Returns the residual and the constant in dB.
fn projected_mse(model: &PathLossModel, data: &MeasurementDataset) -> Option<(f64, f64)> {
    if model.validate().is_err() {
        return None;
    }
    let n = data.points().len() as f64;
    let mut diff = Vec::with_capacity(data.points().len());
    for p in data.points() {
        let g = model.log_gain(p.r_m).ok()? * DB_PER_NEPER;
        diff.push(p.gain_db - g);
    }
    let offset = if matches!(model, PathLossModel::Hybrid { .. }) {
        0.0
    } else {
        diff.iter().sum::<f64>() / n
    };
    let mse = diff.iter().map(|d| (d - offset).powi(2)).sum::<f64>() / n;
    mse.is_finite().then_some((mse, offset))
}

#[derive(Clone, Copy)]
struct Objective<'a> {
    family: Family,
    coords: &'a [Coord],
    fixed_beta: Option<f64>,
    data: &'a MeasurementDataset,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let model = build(self.family, self.coords, x, self.fixed_beta);
        Ok(projected_mse(&model, self.data).map_or(f64::INFINITY, |(mse, _)| mse))
    }
}

struct Run {
    x: Vec<f64>,
    cost: f64,
    iterations: u64,
    converged: bool,
}

fn simplex_search(objective: &Objective<'_>, start: Vec<f64>, step: f64, max_iterations: u64, tol: f64) -> Result<Run> {
    let mut simplex = vec![start.clone()];
    for i in 0..start.len() {
        let mut v = start.clone();
        v[i] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(tol)
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let res = Executor::new(*objective, solver)
        .configure(|s| s.max_iters(max_iterations))
        .run()
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let state = res.state();
    let x = state
        .get_best_param()
        .cloned()
        .ok_or_else(|| Error::Optimizer("simplex search produced no iterate".into()))?;
    Ok(Run {
        x,
        cost: state.get_best_cost(),
        iterations: state.get_iter(),
        converged: matches!(state.get_termination_reason(), Some(TerminationReason::SolverConverged)),
    })
}

pub(super) struct SearchOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: u64,
}

/// Multi-start simplex fit of a family other than PL6.
pub(super) fn fit_simplex(
    data: &MeasurementDataset,
    family: Family,
    fixed_beta: Option<f64>,
    opts: &SearchOptions,
) -> Result<FitResult> {
    let coords = layout(family, fixed_beta);
    let (r_min, r_max) = data.distance_range();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.starts.max(1))
        .map(|i| {
            coords
                .iter()
                .map(|c| {
                    let (lo, hi) = c.start_box(r_min, r_max);
                    let u: f64 = rng.random();
                    if i == 0 {
                        c.centre(r_min, r_max)
                    } else {
                        lo + (hi - lo) * u
                    }
                })
                .collect()
        })
        .collect();

    let spread = data.gain_variance().max(1e-6);
    let tol = 1e-13 * spread;
    let objective = Objective {
        family,
        coords: &coords,
        fixed_beta,
        data,
    };
    let runs = starts
        .into_par_iter()
        .map(|s| simplex_search(&objective, s, 0.5, opts.max_iterations, tol))
        .collect::<Result<Vec<_>>>()?;
    // lowest cost wins; ties go to the earlier start
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("at least one start");
    if !best.cost.is_finite() {
        return Err(Error::Optimizer(format!("{family}: no start gave a finite residual")));
    }
    let polish = simplex_search(&objective, best.x.clone(), 0.05, opts.max_iterations, tol)?;
    let iterations = best.iterations + polish.iterations;
    let final_run = if polish.cost <= best.cost { polish } else { best };
    let shape = build(family, &coords, &final_run.x, fixed_beta);
    let (_, offset_db) = projected_mse(&shape, data)
        .ok_or_else(|| Error::Optimizer(format!("{family}: best parameters left the model domain")))?;
    let model = with_gain_constant(shape, 10f64.powf(offset_db / 10.0));
    Ok(FitResult {
        rms_db: super::rms_error(data, &model)?,
        model,
        iterations,
        converged: final_run.converged,
    })
}

/// Least squares with the given columns; returns coefficients and the sum
/// of squared residuals.
fn linear_least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = columns.len();
    let mut m = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
        }
        m[i][k] = columns[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    // Gaussian elimination with partial pivoting
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..k {
            if row != col {
                let f = m[row][col] / m[col][col];
                for c in col..=k {
                    m[row][c] -= f * m[col][c];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..k).map(|i| m[i][k] / m[i][i]).collect();
    let sse = y
        .iter()
        .enumerate()
        .map(|(j, yj)| {
            let fit: f64 = columns.iter().zip(&coef).map(|(c, b)| c[j] * b).sum();
            (yj - fit).powi(2)
        })
        .sum();
    coef.iter().all(|c| c.is_finite()).then_some((coef, sse))
}

/// Two-slope PL6 fit: every breakpoint candidate between distinct
/// distances, each with a linear fit of `(10 log10 A, η₁, η₂)` subject to
/// `0 ≤ η₁ ≤ η₂`.
pub(super) fn fit_two_slope(data: &MeasurementDataset) -> Result<FitResult> {
    let distances = data.distinct_distances();
    let y: Vec<f64> = data.points().iter().map(|p| p.gain_db).collect();
    let level: Vec<f64> = data.points().iter().map(|p| DB_PER_NEPER * p.r_m.ln()).collect();
    let ones = vec![1.0; y.len()];
    let mut best: Option<(f64, f64, f64, f64, f64)> = None;
    let mut scanned = 0u64;
    for k in 1..distances.len().saturating_sub(2) {
        let r1 = distances[k];
        if r1 < 1.0 {
            continue;
        }
        scanned += 1;
        let (left, right): (Vec<f64>, Vec<f64>) = data
            .points()
            .iter()
            .zip(&level)
            .map(|(p, l)| if p.r_m <= r1 { (-l, 0.0) } else { (0.0, -l) })
            .unzip();
        let all: Vec<f64> = level.iter().map(|l| -l).collect();
        // faces of the feasible set: free, η₁ = η₂, η₁ = 0, both zero
        let mut candidates = Vec::new();
        if let Some((c, sse)) = linear_least_squares(&[ones.clone(), left.clone(), right.clone()], &y) {
            candidates.push((sse, c[0], c[1], c[2]));
        }
        if let Some((c, sse)) = linear_least_squares(&[ones.clone(), all], &y) {
            candidates.push((sse, c[0], c[1], c[1]));
        }
        if let Some((c, sse)) = linear_least_squares(&[ones.clone(), right], &y) {
            candidates.push((sse, c[0], 0.0, c[1]));
        }
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        candidates.push((y.iter().map(|v| (v - mean).powi(2)).sum(), mean, 0.0, 0.0));
        for (sse, c, e1, e2) in candidates {
            if e1 < 0.0 || e2 < e1 {
                continue;
            }
            if best.is_none_or(|b| sse < b.0) {
                best = Some((sse, c, e1, e2, r1));
            }
        }
    }
    let (_, c, e1, e2, r1) = best.ok_or_else(|| {
        Error::Identifiability("PL6 needs at least two distinct distances on each side of a breakpoint at or beyond 1 m".into())
    })?;
    let model = PathLossModel::MultiSlope {
        a: 10f64.powf(c / 10.0),
        eta: vec![e1, e2],
        breakpoints: vec![r1],
    };
    Ok(FitResult {
        rms_db: super::rms_error(data, &model)?,
        model,
        iterations: scanned,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_a_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let (c, sse) = linear_least_squares(&[vec![1.0; 10], x], &y).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12);
        assert!(sse < 1e-20);
        assert!(linear_least_squares(&[vec![1.0; 3], vec![2.0; 3]], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn layouts_drop_fixed_beta() {
        assert_eq!(layout(Family::PL1, Some(0.5)), vec![Coord::LnAlpha]);
        assert_eq!(layout(Family::PL10, None).len(), 4);
        let m = build(Family::PL2, &layout(Family::PL2, None), &[0.0, 0.0, -0.25], None);
        assert_eq!(m, PathLossModel::StretchedExpPower { a: 1.0, alpha: 1.0, beta: 1.0, eta: 0.25 });
    }
}
