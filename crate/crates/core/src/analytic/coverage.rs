use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use super::laplace::Kernel;
use super::{CoverageMethod, Estimate, SirThreshold};
use crate::error::{Error, Result};
use crate::pathloss::NetworkParams;
use crate::quadrature::{integrate_to_infinity, QuadConfig};
use crate::special::{extended_incomplete_gamma, gamma, one_minus_x_mills, polylog_neg_ln, PolylogOrder};

/// Coverage probability `P(SIR ≥ θ)` (or SINR when `params` carries noise)
/// by the nested quadrature valid for every β.
///
/// The serving distance is integrated in `v = πλr²`, whose density is
/// `e^-v`; the interference Laplace transform is evaluated at each `v`.
pub fn coverage_general(params: &NetworkParams, theta: SirThreshold, cfg: &QuadConfig) -> Result<Estimate> {
    params.validate()?;
    let ln_theta = theta.ln();
    let kernel = Kernel::new(params);
    let inner = kernel.inner_config(cfg);
    let (lambda, alpha, half_beta) = (params.lambda, params.alpha, params.beta / 2.0);
    let noise = params.noise();

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let worst_inner = Cell::new(0.0f64);
    let outer = integrate_to_infinity(
        |v| {
            let c = alpha * (v / (PI * lambda)).powf(half_beta);
            let j = match kernel.exponent(ln_theta, c, &inner) {
                Ok(j) => j,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    return 0.0;
                }
            };
            let noise_term = if noise > 0.0 { (ln_theta + noise.ln() + c).exp() } else { 0.0 };
            let conditional = (-kernel.k * j.value - noise_term).exp();
            worst_inner.set(worst_inner.get().max(conditional * kernel.k * j.abs_error));
            (-v).exp() * conditional
        },
        0.0,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let outer = outer?;
    Ok(Estimate {
        value: outer.value.clamp(0.0, 1.0),
        abs_error: outer.abs_error + worst_inner.get(),
    })
}

/// Coefficients `a_0 … a_{n+1}` of the polylogarithmic exponent:
/// `a_k = π (n+1)! / (k! α^(n-k+1)) · Li_{n-k+1}(-θ)` and `a_{n+1} = -π`.
pub fn polylog_coefficients(theta: SirThreshold, n: u32, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let mut a = Vec::with_capacity(n as usize + 2);
    for k in 0..=n {
        let order = n - k + 1;
        // (n+1)!/k! as a running product avoids overflow for large n
        let ratio: f64 = ((k + 1)..=(n + 1)).map(f64::from).product();
        let li = polylog_neg_ln(PolylogOrder::new(order)?, theta.ln())?;
        a.push(PI * ratio / alpha.powi(order as i32) * li);
    }
    a.push(-PI);
    Ok(a)
}

/// Coverage for `β = 2/(n+1)` as a single quadrature of the polylogarithmic
/// exponent.
pub fn coverage_polylog(params: &NetworkParams, theta: SirThreshold, cfg: &QuadConfig) -> Result<Estimate> {
    params.validate()?;
    let n = params.require_polylog_order()?;
    let a = polylog_coefficients(theta, n, params.alpha)?;
    let lambda = params.lambda;
    let alpha = params.alpha;
    let exponent = 1.0 / f64::from(n + 1);
    let has_noise = params.has_noise();
    let ln_noise = params.noise().ln() + theta.ln();
    // ρ = r^(2/(n+1)); the a_0 term is factored out of the integral
    let higher: Vec<f64> = a[1..=n as usize].iter().map(|ak| lambda * ak).collect();
    let integral = integrate_to_infinity(
        |v| {
            let rho = (v / (PI * lambda)).powf(exponent);
            let poly = higher.iter().rev().fold(0.0, |acc, &c| acc * rho + c) * rho;
            let noise_term = if has_noise { (ln_noise + alpha * rho).exp() } else { 0.0 };
            (-v + poly - noise_term).exp()
        },
        0.0,
        cfg,
    )?;
    let leading = (lambda * a[0]).exp();
    let est = Estimate::from(integral).scaled(leading);
    Ok(Estimate {
        value: est.value.clamp(0.0, 1.0),
        ..est
    })
}

fn require_interference_limited(params: &NetworkParams, what: &str) -> Result<()> {
    if params.has_noise() {
        return Err(Error::Precondition(format!("{what} holds only without noise")));
    }
    Ok(())
}

fn require_order(params: &NetworkParams, n: u32, what: &str) -> Result<()> {
    if params.polylog_order() != Some(n) {
        return Err(Error::Precondition(format!(
            "{what} requires beta = {}, got {}",
            2.0 / f64::from(n + 1),
            params.beta
        )));
    }
    Ok(())
}

/// Closed-form coverage for β = 1 in terms of the Gaussian Mills ratio.
pub fn coverage_beta1(params: &NetworkParams, theta: SirThreshold) -> Result<Estimate> {
    params.validate()?;
    require_order(params, 1, "the beta = 1 closed form")?;
    require_interference_limited(params, "the beta = 1 closed form")?;
    let (lambda, alpha) = (params.lambda, params.alpha);
    let li2 = polylog_neg_ln(PolylogOrder::new(2)?, theta.ln())?;
    let y = theta.ln_1p();
    let x = (2.0 * PI * lambda).sqrt() * y / alpha;
    let value = (2.0 * PI * lambda / (alpha * alpha) * li2).exp() * one_minus_x_mills(x);
    Ok(Estimate {
        value,
        abs_error: 4.0 * f64::EPSILON * value.max(f64::MIN_POSITIVE),
    })
}

/// Closed-form coverage for β = 2: `(1+θ)^(-πλ/α)`.
pub fn coverage_beta2(params: &NetworkParams, theta: SirThreshold) -> Result<Estimate> {
    params.validate()?;
    require_order(params, 0, "the beta = 2 closed form")?;
    require_interference_limited(params, "the beta = 2 closed form")?;
    let value = (-(PI * params.lambda / params.alpha) * theta.ln_1p()).exp();
    Ok(Estimate::exact(value))
}

/// One of the analytic bounds on the coverage probability, for β = 2/(n+1).
pub fn coverage_bound(
    params: &NetworkParams,
    theta: SirThreshold,
    which: CoverageMethod,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    params.validate()?;
    let n = params.require_polylog_order()?;
    require_interference_limited(params, "the coverage bounds")?;
    let lambda = params.lambda;
    let m = f64::from(n + 1);
    let value = match which {
        CoverageMethod::UpperBoundGamma => {
            let a = polylog_coefficients(theta, n, params.alpha)?;
            let lead = (lambda * a[0]).exp();
            if n == 0 {
                lead
            } else {
                let b = -lambda.powf(1.0 / m) * a[n as usize] / PI.powf(f64::from(n) / m);
                lead * extended_incomplete_gamma(1.0, 0.0, b, -f64::from(n) / m, cfg)?
            }
        }
        CoverageMethod::UpperBoundPolylog => {
            let a0 = polylog_coefficients(theta, n, params.alpha)?[0];
            (lambda * a0).exp()
        }
        CoverageMethod::UpperBoundLog => {
            let factorial: f64 = (1..=n + 1).map(f64::from).product();
            (-lambda * PI * factorial * theta.ln_1p() / params.alpha.powf(m)).exp()
        }
        CoverageMethod::LowerBoundJensen => {
            let a = polylog_coefficients(theta, n, params.alpha)?;
            let exponent: f64 = (0..=n)
                .map(|k| {
                    let q = f64::from(k) / m;
                    a[k as usize] * lambda.powf(1.0 - q) * PI.powf(-q) * gamma(1.0 + q)
                })
                .sum();
            exponent.exp()
        }
        other => {
            return Err(Error::Validation(format!("{other} is not a coverage bound")));
        }
    };
    let abs_error = match which {
        CoverageMethod::UpperBoundGamma => value * cfg.rel_tol + cfg.abs_tol,
        _ => 4.0 * f64::EPSILON * value,
    };
    Ok(Estimate { value, abs_error })
}

/// The cheapest exact method applicable to `params`.
pub fn select_method(params: &NetworkParams) -> CoverageMethod {
    match params.polylog_order() {
        Some(0) if !params.has_noise() => CoverageMethod::ClosedBeta2,
        Some(1) if !params.has_noise() => CoverageMethod::ClosedBeta1,
        Some(_) => CoverageMethod::PolylogCompact,
        None => CoverageMethod::GeneralQuadrature,
    }
}

/// Coverage probability by `method`, or by [`select_method`] when `None`.
pub fn coverage(
    params: &NetworkParams,
    theta: SirThreshold,
    method: Option<CoverageMethod>,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    match method.unwrap_or_else(|| select_method(params)) {
        CoverageMethod::GeneralQuadrature => coverage_general(params, theta, cfg),
        CoverageMethod::PolylogCompact => coverage_polylog(params, theta, cfg),
        CoverageMethod::ClosedBeta1 => coverage_beta1(params, theta),
        CoverageMethod::ClosedBeta2 => coverage_beta2(params, theta),
        bound => coverage_bound(params, theta, bound, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn params(lambda: f64, alpha: f64, beta: f64) -> NetworkParams {
        NetworkParams::new(lambda, alpha, beta).unwrap()
    }

    fn th(db: f64) -> SirThreshold {
        SirThreshold::from_db(db).unwrap()
    }

    const BETAS: [f64; 4] = [2.0, 1.0, 2.0 / 3.0, 0.5];
    const LAMBDAS: [f64; 5] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2];
    const THETAS_DB: [f64; 4] = [-5.0, 0.0, 5.0, 10.0];

    #[test]
    fn unit_example_beta2() {
        let theta = SirThreshold::new(E - 1.0).unwrap();
        let p = params(1.0 / PI, 1.0, 2.0);
        let cfg = QuadConfig::default();
        let general = coverage_general(&p, theta, &cfg).unwrap().value;
        let closed = coverage_beta2(&p, theta).unwrap().value;
        assert!((closed - (-1.0f64).exp()).abs() < 1e-15);
        assert!((general - closed).abs() < 1e-6, "{general}");
        let poly = coverage_polylog(&p, theta, &cfg).unwrap().value;
        assert!((poly - closed).abs() < 1e-12);
    }

    #[test]
    fn vanishing_threshold_gives_full_coverage() {
        let cfg = QuadConfig::default();
        let tiny = SirThreshold::new(1e-12).unwrap();
        for beta in BETAS {
            let p = params(1e-4, 1.037, beta);
            for m in [CoverageMethod::GeneralQuadrature, CoverageMethod::PolylogCompact] {
                let v = coverage(&p, tiny, Some(m), &cfg).unwrap().value;
                assert!((v - 1.0).abs() < 1e-8, "{m} beta={beta}: {v}");
            }
        }
        let p = params(1e-4, 0.1, 1.0);
        assert!((coverage_beta1(&p, tiny).unwrap().value - 1.0).abs() < 1e-10);
        let p = params(1e-12, 0.1, 1.0);
        assert!((coverage_beta1(&p, th(5.0)).unwrap().value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn coefficient_examples() {
        let alpha = 1.7;
        let theta = th(3.0);
        let a = polylog_coefficients(theta, 0, alpha).unwrap();
        assert_eq!(a.len(), 2);
        assert!((a[0] + PI / alpha * theta.linear().ln_1p()).abs() < 1e-14);
        assert_eq!(a[1], -PI);

        let a = polylog_coefficients(SirThreshold::new(1e-300).unwrap(), 2, 1.0).unwrap();
        assert!(a[..3].iter().all(|x| x.abs() < 1e-290));
        assert_eq!(a[3], -PI);

        // Li_2(-1) = -π²/12 and Li_1(-1) = -ln 2
        let a = polylog_coefficients(SirThreshold::new(1.0).unwrap(), 1, 1.0).unwrap();
        assert!((a[0] + PI.powi(3) / 6.0).abs() < 1e-12);
        assert!((a[1] + 2.0 * PI * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn coefficients_are_non_positive() {
        for n in 0..6 {
            for db in [-20.0, -5.0, 0.0, 10.0, 30.0] {
                let a = polylog_coefficients(th(db), n, 0.8).unwrap();
                assert!(a.iter().all(|&x| x <= 0.0), "n={n} {db} dB: {a:?}");
            }
        }
    }

    #[test]
    fn methods_agree_on_grid() {
        let cfg = QuadConfig::default();
        for beta in BETAS {
            for lambda in LAMBDAS {
                for db in THETAS_DB {
                    let p = params(lambda, 1.037, beta);
                    let theta = th(db);
                    let poly = coverage_polylog(&p, theta, &cfg).unwrap().value;
                    let general = coverage_general(&p, theta, &cfg).unwrap().value;
                    assert!(
                        (general - poly).abs() <= 1e-4,
                        "beta={beta} lambda={lambda} {db} dB: {general} vs {poly}"
                    );
                    let closed = match p.polylog_order() {
                        Some(0) => Some(coverage_beta2(&p, theta).unwrap().value),
                        Some(1) => Some(coverage_beta1(&p, theta).unwrap().value),
                        _ => None,
                    };
                    if let Some(closed) = closed {
                        assert!(
                            (closed - poly).abs() <= 1e-9,
                            "beta={beta} lambda={lambda} {db} dB: {closed} vs {poly}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn closed_beta1_example_matches_reference_integral() {
        // n = 1 exponent integrated in 30-digit arithmetic (mpmath quad)
        let reference = 0.577864008883112951281561243239;
        let closed = coverage_beta1(&params(1e-4, 0.1, 1.0), th(5.0)).unwrap().value;
        assert!((closed - reference).abs() < 1e-12, "{closed}");
        let poly = coverage_polylog(&params(1e-4, 0.1, 1.0), th(5.0), &QuadConfig::new(1e-14, 1e-12))
            .unwrap()
            .value;
        assert!((poly - reference).abs() < 1e-11, "{poly}");
    }

    #[test]
    fn bound_equalities() {
        let cfg = QuadConfig::new(1e-13, 1e-12);
        for lambda in [1e-6, 1e-4, 1e-2] {
            for alpha in [0.1, 1.0] {
                for db in THETAS_DB {
                    let theta = th(db);
                    let p1 = params(lambda, alpha, 1.0);
                    let exact = coverage_beta1(&p1, theta).unwrap().value;
                    let ub = coverage_bound(&p1, theta, CoverageMethod::UpperBoundGamma, &cfg)
                        .unwrap()
                        .value;
                    assert!((ub - exact).abs() <= 1e-10, "n=1 {lambda} {alpha} {db}: {ub} vs {exact}");

                    let p0 = params(lambda, alpha, 2.0);
                    let exact = coverage_beta2(&p0, theta).unwrap().value;
                    for m in [
                        CoverageMethod::UpperBoundGamma,
                        CoverageMethod::UpperBoundPolylog,
                        CoverageMethod::UpperBoundLog,
                        CoverageMethod::LowerBoundJensen,
                    ] {
                        let b = coverage_bound(&p0, theta, m, &cfg).unwrap().value;
                        assert!((b - exact).abs() <= 1e-10, "{m} n=0: {b} vs {exact}");
                    }
                }
            }
        }
    }

    #[test]
    fn bound_sandwich() {
        let cfg = QuadConfig::default();
        for beta in BETAS {
            for lambda in LAMBDAS {
                for db in THETAS_DB {
                    let p = params(lambda, 1.037, beta);
                    let theta = th(db);
                    let exact = coverage_polylog(&p, theta, &cfg).unwrap();
                    let b = |m| coverage_bound(&p, theta, m, &cfg).unwrap().value;
                    let lb = b(CoverageMethod::LowerBoundJensen);
                    let ub12 = b(CoverageMethod::UpperBoundGamma);
                    let ub13 = b(CoverageMethod::UpperBoundPolylog);
                    let ub14 = b(CoverageMethod::UpperBoundLog);
                    let slack = exact.abs_error + 1e-12;
                    let ctx = format!("beta={beta} lambda={lambda} {db} dB");
                    assert!(lb <= exact.value + slack, "{ctx}: lb {lb} > {}", exact.value);
                    assert!(exact.value <= ub12 + slack, "{ctx}: {} > ub12 {ub12}", exact.value);
                    assert!(ub12 <= ub13 * (1.0 + 1e-9), "{ctx}: {ub12} > {ub13}");
                    assert!(ub13 <= ub14 * (1.0 + 1e-12), "{ctx}: {ub13} > {ub14}");
                }
            }
        }
    }

    #[test]
    fn density_monotonicity() {
        let cfg = QuadConfig::default();
        for beta in BETAS {
            for db in THETAS_DB {
                let cov = |lambda| coverage(&params(lambda, 1.037, beta), th(db), None, &cfg).unwrap().value;
                let (lo, mid, hi) = (cov(1e-6), cov(1e-4), cov(1e-2));
                assert!(hi < mid && mid < lo, "beta={beta} {db} dB: {lo} {mid} {hi}");
                // density at which the log upper bound itself drops below 1e-3
                let n = params(1.0, 1.037, beta).polylog_order().unwrap();
                let factorial: f64 = (1..=n + 1).map(f64::from).product();
                let lambda_big = 1e-3f64.ln().abs() * 1.037f64.powi(n as i32 + 1)
                    / (PI * factorial * th(db).linear().ln_1p());
                assert!(cov(lambda_big * 1.01) < 1e-3);
            }
        }
    }

    #[test]
    fn noise_lowers_coverage_and_gap_shrinks_with_density() {
        let cfg = QuadConfig::default();
        let theta = th(5.0);
        let mut prev_gap = f64::INFINITY;
        for lambda in [1e-5, 1e-4, 1e-3] {
            let p = params(lambda, 1.037, 0.5);
            let noisy = p.with_noise(1e-6).unwrap();
            let sir = coverage(&p, theta, None, &cfg).unwrap().value;
            let sinr = coverage(&noisy, theta, None, &cfg).unwrap().value;
            let sinr_general = coverage_general(&noisy, theta, &cfg).unwrap().value;
            assert!((sinr - sinr_general).abs() < 1e-6);
            let gap = sir - sinr;
            assert!(gap > 0.0 && gap < prev_gap, "lambda={lambda}: {sir} {sinr}");
            prev_gap = gap;
        }
    }

    #[test]
    fn preconditions() {
        let cfg = QuadConfig::default();
        let p = params(1e-4, 1.0, 0.7);
        assert!(matches!(coverage_polylog(&p, th(0.0), &cfg), Err(Error::Precondition(_))));
        assert!(matches!(coverage_beta1(&p, th(0.0)), Err(Error::Precondition(_))));
        assert!(matches!(
            coverage_bound(&p, th(0.0), CoverageMethod::UpperBoundLog, &cfg),
            Err(Error::Precondition(_))
        ));
        let noisy = params(1e-4, 1.0, 2.0).with_noise(1e-3).unwrap();
        assert!(matches!(coverage_beta2(&noisy, th(0.0)), Err(Error::Precondition(_))));
        assert_eq!(select_method(&noisy), CoverageMethod::PolylogCompact);
        assert_eq!(select_method(&p), CoverageMethod::GeneralQuadrature);
        assert_eq!(select_method(&params(1.0, 1.0, 2.0 / 3.0)), CoverageMethod::PolylogCompact);
        assert_eq!(select_method(&params(1.0, 1.0, 1.0)), CoverageMethod::ClosedBeta1);
        assert!(coverage_bound(&params(1.0, 1.0, 1.0), th(0.0), CoverageMethod::PolylogCompact, &cfg).is_err());
        // coverage at non-polylog β still works through the general path
        let v = coverage(&p, th(0.0), None, &cfg).unwrap().value;
        assert!(v > 0.0 && v < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn coverage_decreases_in_threshold(
            lambda_exp in -6.0f64..-2.0,
            alpha in 0.2f64..3.0,
            n in 0u32..4,
            db in -10.0f64..20.0,
        ) {
            let p = params(10f64.powf(lambda_exp), alpha, 2.0 / f64::from(n + 1));
            let cfg = QuadConfig::default();
            let lo = coverage(&p, th(db), None, &cfg).unwrap().value;
            let hi = coverage(&p, th(db + 1.0), None, &cfg).unwrap().value;
            prop_assert!(hi < lo);
            prop_assert!(lo > 0.0 && lo < 1.0);
        }
    }
}
