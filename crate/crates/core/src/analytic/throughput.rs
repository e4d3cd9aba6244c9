use std::cell::RefCell;
use std::f64::consts::PI;

use super::{coverage, CoverageMethod, Estimate, SirThreshold};
use crate::error::{Error, Result};
use crate::pathloss::NetworkParams;
use crate::quadrature::{golden_section_max, QuadConfig};

/// Potential throughput `λ log₂(1+θ) P_cov(λ, θ)` in bps/Hz/m².
pub fn potential_throughput(
    params: &NetworkParams,
    theta: SirThreshold,
    method: Option<CoverageMethod>,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    let rate = params.lambda * theta.ln_1p() / std::f64::consts::LN_2;
    Ok(coverage(params, theta, method, cfg)?.scaled(rate))
}

/// Density maximising the potential throughput when β = 2:
/// `λ* = α / (π ln(1+θ))`.
pub fn optimal_density_beta2(alpha: f64, theta: SirThreshold) -> f64 {
    alpha / (PI * theta.ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOptimum {
    pub lambda: f64,
    pub throughput: f64,
    /// True when the maximum sits at an end of the search range.
    pub at_boundary: bool,
}

/// Maximises the potential throughput over `λ ∈ [lambda_lo, lambda_hi]`
/// (BS/m²): a log-spaced grid scan followed by golden-section refinement
/// between the neighbours of the best grid point.
pub fn throughput_argmax_density(
    params: &NetworkParams,
    theta: SirThreshold,
    lambda_lo: f64,
    lambda_hi: f64,
    method: Option<CoverageMethod>,
    cfg: &QuadConfig,
) -> Result<DensityOptimum> {
    if !(lambda_lo > 0.0 && lambda_hi > lambda_lo && lambda_hi.is_finite()) {
        return Err(Error::Validation(format!(
            "density search range must satisfy 0 < lo < hi, got [{lambda_lo}, {lambda_hi}]"
        )));
    }
    const GRID: usize = 41;
    let (lo, hi) = (lambda_lo.ln(), lambda_hi.ln());
    let xs: Vec<f64> = (0..GRID).map(|i| lo + (hi - lo) * i as f64 / (GRID - 1) as f64).collect();
    let eval = |x: f64| -> Result<f64> {
        Ok(potential_throughput(&params.with_lambda(x.exp())?, theta, method, cfg)?.value)
    };
    let mut values = Vec::with_capacity(GRID);
    for &x in &xs {
        values.push(eval(x)?);
    }
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
    let left = xs[best.saturating_sub(1)];
    let right = xs[(best + 1).min(GRID - 1)];
    let failure = RefCell::new(None);
    let (x, fx) = golden_section_max(
        |x| {
            eval(x).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            })
        },
        left,
        right,
        1e-10,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (x, fx) = if fx >= values[best] { (x, fx) } else { (xs[best], values[best]) };
    Ok(DensityOptimum {
        lambda: x.exp(),
        throughput: fx,
        at_boundary: best == 0 || best == GRID - 1,
    })
}
