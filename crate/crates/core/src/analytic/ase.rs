use std::f64::consts::PI;

use super::{coverage, CoverageMethod, Estimate, SirThreshold};
use crate::error::{Error, Result};
use crate::pathloss::NetworkParams;
use crate::quadrature::{integrate, integrate_to_infinity, QuadConfig};
use crate::special::{factorial, LOG2_E};

/// Area spectral efficiency `λ E[log₂(1+SIR)]` in bps/Hz/m².
///
/// Writing `E = λ log₂e ∫ P_cov(t)/(1+t) dt` and substituting
/// `t = exp(w/(λC)) - 1`, with `C` the Campbell constant, gives
/// `E = (log₂e / C) ∫₀^∞ P_cov(t(w)) dw`. Since `P_cov(t) ≤ (1+t)^(-λC)`,
/// the integrand is at most `e^-w`, which certifies the truncation point.
pub fn ase(params: &NetworkParams, method: Option<CoverageMethod>, cfg: &QuadConfig) -> Result<Estimate> {
    params.validate()?;
    let campbell = params.campbell_constant();
    let scale = params.lambda * campbell;
    let tail_tol = 0.1 * cfg.abs_tol.max(cfg.rel_tol * 1e-3);
    let w_max = -tail_tol.ln();

    let mut worst_cov_error = 0.0f64;
    let mut failure = None;
    let mut integrand = |w: f64| {
        let x = w / scale;
        if x == 0.0 {
            return 1.0;
        }
        // ln(e^x - 1)
        let ln_t = if x > 30.0 { x + (-(-x).exp()).ln_1p() } else { x.exp_m1().ln() };
        let theta = match SirThreshold::from_ln(ln_t) {
            Ok(theta) => theta,
            Err(_) => return 0.0,
        };
        match coverage(params, theta, method, cfg) {
            Ok(p) => {
                worst_cov_error = worst_cov_error.max(p.abs_error);
                p.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };

    // geometric pieces resolve the initial layer whose width is set by λC
    let mut lo = 0.0;
    let mut hi = 1e-3 * scale.min(1.0);
    let mut total = Estimate::exact(0.0);
    while lo < w_max {
        let upper = hi.min(w_max);
        let piece = integrate(&mut integrand, lo, upper, cfg)?;
        total.value += piece.value;
        total.abs_error += piece.abs_error;
        lo = upper;
        hi = 2.0 * upper;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    total.abs_error += worst_cov_error * w_max + (-w_max).exp();
    Ok(total.scaled(LOG2_E / campbell))
}

/// Ultra-dense limit of the ASE, `log₂(e) / C`; also an upper bound at every
/// density.
pub fn ase_limit(params: &NetworkParams) -> f64 {
    LOG2_E / params.campbell_constant()
}

/// `α^(n+1) log₂(e) / (π (n+1)!)`, the density-independent ASE ceiling for
/// β = 2/(n+1).
pub fn ase_upper_bound(alpha: f64, n: u32) -> f64 {
    alpha.powi(n as i32 + 1) * LOG2_E / (PI * factorial(n + 1))
}

/// Mean interference per unit density, by quadrature and in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampbellCheck {
    pub quadrature: Estimate,
    pub closed_form: f64,
}

impl CampbellCheck {
    pub fn relative_error(&self) -> f64 {
        ((self.quadrature.value - self.closed_form) / self.closed_form).abs()
    }
}

/// `∫₀^∞ e^(-α r^β) 2πr dr` by quadrature, against `π (n+1)! / α^(n+1)`.
pub fn campbell_mean_interference(alpha: f64, beta: f64, cfg: &QuadConfig) -> Result<CampbellCheck> {
    let params = NetworkParams::new(1.0, alpha, beta)?;
    let n = params.require_polylog_order()?;
    // in units of the decay length α^(-1/β) the integrand is x e^(-x^β);
    // the bulk sits below x ≈ (2/β)^(1/β)·few, so split there
    let length = alpha.powf(-1.0 / beta);
    let knee = (4.0 / beta).powf(1.0 / beta);
    let f = |x: f64| x * (-x.powf(beta)).exp();
    let body = integrate(f, 0.0, knee, cfg)?;
    let tail = integrate_to_infinity(f, knee, cfg)?;
    let quadrature = Estimate::from(body + tail).scaled(2.0 * PI * length * length);
    if !quadrature.value.is_finite() {
        return Err(Error::Domain("Campbell integral is not finite".into()));
    }
    Ok(CampbellCheck {
        quadrature,
        closed_form: PI * factorial(n + 1) / alpha.powi(n as i32 + 1),
    })
}
