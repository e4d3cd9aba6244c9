use std::f64::consts::PI;

use super::Estimate;
use crate::error::{Error, Result};
use crate::pathloss::NetworkParams;
use crate::quadrature::{Integral, QuadConfig};
use crate::special::fermi_weighted;

/// Shape constants of the interference field: `K = 2πλ / (β α^(2/β))` and
/// the power `p = (2-β)/β` of the logarithmic kernel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub k: f64,
    pub p: f64,
}

impl Kernel {
    pub fn new(params: &NetworkParams) -> Self {
        let q = 2.0 / params.beta;
        Kernel {
            k: 2.0 * PI * params.lambda / (params.beta * params.alpha.powf(q)),
            p: q - 1.0,
        }
    }

    /// `S(σ, c) = ∫₀^∞ σ (c+u)^p / (e^u + σ) du`, taking `ln σ`.
    ///
    /// With `y = e^-(c+u)` this is `e^c` times the interference integral
    /// `∫₀^(e^-c) s/(1+sy) (-ln y)^p dy` at `s = σ e^c`; the transform is
    /// `exp(-K S)`.
    pub fn exponent(&self, ln_sigma: f64, c: f64, cfg: &QuadConfig) -> Result<Integral> {
        let p = self.p;
        let g = move |u: f64| {
            if p == 0.0 {
                1.0
            } else if c + u <= 0.0 {
                0.0
            } else {
                (p * (c + u).ln()).exp()
            }
        };
        fermi_weighted(g, ln_sigma, cfg)
    }

    /// Tolerances for [`Kernel::exponent`] nested inside an outer integral
    /// with tolerances `cfg`.
    pub fn inner_config(&self, cfg: &QuadConfig) -> QuadConfig {
        QuadConfig::new(0.1 * cfg.abs_tol / self.k.max(1.0), 0.1 * cfg.rel_tol)
    }
}

/// Laplace transform `E[exp(-s I)]` of the aggregate interference seen by a
/// user whose serving base station is at distance `r`.
pub fn laplace_interference(s: f64, r: f64, params: &NetworkParams, cfg: &QuadConfig) -> Result<Estimate> {
    params.validate()?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("Laplace variable must be non-negative, got {s}")));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("serving distance must be non-negative, got {r}")));
    }
    if s == 0.0 {
        return Ok(Estimate::exact(1.0));
    }
    let c = params.alpha * r.powf(params.beta);
    let kernel = Kernel::new(params);
    let j = kernel.exponent(s.ln() - c, c, &kernel.inner_config(cfg))?;
    let value = (-kernel.k * j.value).exp();
    Ok(Estimate {
        value,
        abs_error: value * kernel.k * j.abs_error,
    })
}
