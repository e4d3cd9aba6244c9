//! Special functions used by the closed-form coverage results.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_real_line, integrate_to_infinity, Integral, QuadConfig};

/// Integer order `s ≥ 1` of a polylogarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolylogOrder(u32);

impl PolylogOrder {
    pub fn new(s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::Domain("polylog order must be at least 1".into()));
        }
        Ok(PolylogOrder(s))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Arguments at or below this use the power series; above it the integral.
pub const SERIES_CUTOFF: f64 = 0.5;

/// Tolerances for the polylog integral. Coverage results are exponentials of
/// large multiples of `Li_s`, so these sit well below the coverage-level
/// defaults.
const POLYLOG_QUAD: QuadConfig = QuadConfig {
    abs_tol: 1e-300,
    rel_tol: 1e-13,
    max_subdivisions: 400,
};

/// `Li_s(-θ)` for integer `s ≥ 1` and `θ > 0`.
pub fn polylog_neg(s: PolylogOrder, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if s.0 == 1 {
        return Ok(-theta.ln_1p());
    }
    if theta <= SERIES_CUTOFF {
        polylog_neg_series(s, theta)
    } else {
        polylog_neg_integral(s, theta)
    }
}

/// `Li_s(-θ)` given `ln θ`, for thresholds beyond the range of `f64`.
pub fn polylog_neg_ln(s: PolylogOrder, ln_theta: f64) -> Result<f64> {
    if !ln_theta.is_finite() {
        return Err(Error::Domain(format!("ln θ must be finite, got {ln_theta}")));
    }
    if s.0 == 1 {
        return Ok(-ln_1p_exp(ln_theta));
    }
    if ln_theta <= SERIES_CUTOFF.ln() {
        polylog_neg_series(s, ln_theta.exp())
    } else {
        Ok(-fermi_dirac(s.0 - 1, ln_theta)? / factorial(s.0 - 1))
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic tail `1 / (1 + e^z)` without overflow.
pub(crate) fn fermi(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// `∫₀^∞ g(x) / (1 + e^(x - l)) dx` for a smooth, at most polynomially
/// growing `g`.
///
/// For `l > 0` the integral is taken in `z = x - l`, so the occupation
/// factor never sees the cancellation in `x - l`, and split where it
/// switches from one to exponential decay.
pub(crate) fn fermi_weighted<G: Fn(f64) -> f64>(g: G, l: f64, cfg: &QuadConfig) -> Result<Integral> {
    if l <= 0.0 {
        return integrate_to_infinity(|x| g(x) * fermi(x - l), 0.0, cfg);
    }
    let f = |z: f64| g(l + z) * fermi(z);
    let flat_end = (-l).max(-40.0);
    let mut total = integrate_to_infinity(f, 0.0, cfg)? + integrate(f, flat_end, 0.0, cfg)?;
    if flat_end > -l {
        total = total + integrate(f, -l, flat_end, cfg)?;
    }
    Ok(total)
}

/// Complete Fermi–Dirac integral `∫₀^∞ x^m / (1 + e^(x - L)) dx`.
fn fermi_dirac(m: u32, l: f64) -> Result<f64> {
    let pow = f64::from(m);
    let g = |x: f64| {
        if m == 0 {
            1.0
        } else if x <= 0.0 {
            0.0
        } else {
            (pow * x.ln()).exp()
        }
    };
    Ok(fermi_weighted(g, l, &POLYLOG_QUAD)?.value)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!(
            "polylog argument -θ needs finite θ > 0, got θ = {theta}"
        )));
    }
    Ok(())
}

/// Alternating series `Σ (-θ)^k / k^s` with compensated summation. Only
/// convergent for `θ ≤ 1` and only fast for small `θ`.
pub fn polylog_neg_series(s: PolylogOrder, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if theta >= 1.0 {
        return Err(Error::Domain(format!(
            "series form needs θ < 1, got {theta}"
        )));
    }
    let order = s.0 as i32;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut power = 1.0f64;
    for k in 1..100_000u32 {
        power *= -theta;
        let term = power / (k as f64).powi(order);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// `Li_s(-θ) = -θ/Γ(s) ∫₀^∞ x^(s-1) / (e^x + θ) dx`, evaluated as
/// `-1/Γ(s) ∫ x^(s-1) / (1 + e^(x - ln θ)) dx`.
pub fn polylog_neg_integral(s: PolylogOrder, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(-fermi_dirac(s.0 - 1, theta.ln())? / factorial(s.0 - 1))
}

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Euler gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Gaussian tail probability `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `1 - x·M(x)` where `M(x) = Q(x)/φ(x)` is the Mills ratio of the standard
/// normal. The direct form cancels catastrophically for large `x`, so a
/// continued fraction takes over there.
pub fn one_minus_x_mills(x: f64) -> f64 {
    if x <= 5.0 {
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        return 1.0 - x * q_function(x) / phi;
    }
    // M(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))); with D = x + t,
    // 1 - x/D = t/(x + t).
    let mut tail = 0.0;
    for k in (2..=80).rev() {
        tail = k as f64 / (x + tail);
    }
    let t = 1.0 / (x + tail);
    t / (x + t)
}

/// Extended incomplete gamma function
/// `Γ'(a, x0, b, β) = ∫_{x0}^∞ t^(a-1) exp(-t - b·t^(-β)) dt`.
///
/// Evaluated in `u = ln t`, where both tails decay at least exponentially.
pub fn extended_incomplete_gamma(a: f64, x0: f64, b: f64, beta: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(a.is_finite() && x0.is_finite() && b.is_finite() && beta.is_finite()) {
        return Err(Error::Domain("extended incomplete gamma needs finite arguments".into()));
    }
    if x0 < 0.0 {
        return Err(Error::Domain(format!("lower limit must be non-negative, got {x0}")));
    }
    // Upper tail: the exponent -t - b t^{-β} must go to -∞.
    if b < 0.0 && (beta < -1.0 || beta == -1.0 && b <= -1.0) {
        return Err(Error::Divergent(format!(
            "b = {b}, β = {beta}: the integrand grows without bound"
        )));
    }
    if x0 == 0.0 {
        let lower_ok = if beta > 0.0 && b != 0.0 { b > 0.0 } else { a > 0.0 };
        if !lower_ok {
            return Err(Error::Divergent(format!(
                "a = {a}, b = {b}, β = {beta}: integrand is not integrable at 0"
            )));
        }
    }
    // log of the integrand after dt = t du
    let log_integrand = move |u: f64| {
        let shape = if b == 0.0 { 0.0 } else { b * (-beta * u).exp() };
        a * u - u.exp() - shape
    };
    let value = if x0 == 0.0 {
        integrate_real_line(|u| log_integrand(u).exp(), cfg)?
    } else {
        let u0 = x0.ln();
        integrate_to_infinity(|u| log_integrand(u).exp(), u0, cfg)?
    };
    Ok(value.value)
}

/// `log₂(e)`.
pub const LOG2_E: f64 = 1.0 / LN_2;
