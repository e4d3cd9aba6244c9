use std::f64::consts::PI;

use stretchnet::analytic::SirThreshold;
use stretchnet::montecarlo::{
    empirical_ase, empirical_coverage, empirical_potential_throughput, simulate, SimulationSpec, SirSampleSet,
};
use stretchnet::NetworkParams;

fn spec(outer_km: f64, inner_km: f64, realizations: usize, users: usize, seed: u64) -> SimulationSpec {
    SimulationSpec {
        outer_region_km: outer_km,
        inner_region_km: inner_km,
        realizations,
        users_per_realization: users,
        master_seed: seed,
        ..Default::default()
    }
}

fn run(spec: &SimulationSpec, lambda_km2: f64, alpha: f64, beta: f64) -> SirSampleSet {
    simulate(spec, &NetworkParams::new(lambda_km2 * 1e-6, alpha, beta).unwrap()).unwrap()
}

#[test]
fn serving_distance_follows_rayleigh_law() {
    let lambda = 10e-6;
    let set = run(&spec(4.0, 1.0, 10_000, 1, 2024), 10.0, 1.037, 0.5);
    let mut r = set.serving_distance_m.clone();
    r.sort_by(f64::total_cmp);
    let n = r.len() as f64;
    let ks = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-PI * lambda * x * x).exp();
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / n.sqrt();
    assert!(ks < critical, "KS statistic {ks} exceeds {critical}");
}

#[test]
fn station_counts_are_poisson() {
    let lambda_km2 = 20.0;
    let set = run(&spec(3.0, 1.0, 4_000, 1, 99), lambda_km2, 1.037, 0.5);
    let mean_expected = lambda_km2 * 9.0;
    let n = set.bs_counts.len() as f64;
    let mean = set.bs_counts.iter().sum::<u64>() as f64 / n;
    let sigma = (mean_expected / n).sqrt();
    assert!((mean - mean_expected).abs() < 3.0 * sigma, "{mean} vs {mean_expected} ± {sigma}");
    let var = set.bs_counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((var / mean - 1.0).abs() < 0.1, "dispersion {}", var / mean);
    assert_eq!(set.redraws, 0);
}

#[test]
fn identical_samples_for_any_thread_count() {
    let s = spec(4.0, 1.0, 64, 5, 31337);
    let params = NetworkParams::new(80e-6, 1.037, 0.5).unwrap();
    let sets: Vec<SirSampleSet> = [1, 2, 8]
        .into_iter()
        .map(|threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&s, &params).unwrap())
        })
        .collect();
    for other in &sets[1..] {
        assert_eq!(&sets[0], other);
        let bits = |x: &SirSampleSet| x.ln_sir.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&sets[0]), bits(other));
    }
}

#[test]
fn outer_window_size_does_not_matter() {
    let big = run(&spec(20.0, 4.0, 150, 20, 5), 50.0, 1.037, 0.5);
    let small = run(&spec(10.0, 4.0, 150, 20, 5), 50.0, 1.037, 0.5);
    for db in [-5.0, 0.0, 5.0] {
        let t = SirThreshold::from_db(db).unwrap();
        let (a, se) = empirical_coverage(&big, t).unwrap();
        let (b, _) = empirical_coverage(&small, t).unwrap();
        assert!((a - b).abs() < se, "{db} dB: {a} vs {b}, se {se}");
    }
}

#[test]
fn noise_matters_less_in_denser_networks() {
    let noise = (-16.0f64).exp();
    let t = SirThreshold::from_db(0.0).unwrap();
    let mut gaps = Vec::new();
    for lambda_km2 in [5.0, 50.0, 500.0] {
        let params = NetworkParams::new(lambda_km2 * 1e-6, 1.037, 0.5).unwrap().with_noise(noise).unwrap();
        let mut s = spec(4.0, 1.0, 100, 20, 17);
        let sir = simulate(&s, &params).unwrap();
        s.include_noise = true;
        let sinr = simulate(&s, &params).unwrap();
        let gap = empirical_coverage(&sir, t).unwrap().0 - empirical_coverage(&sinr, t).unwrap().0;
        gaps.push(gap);
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[0] > 0.05, "{gaps:?}");
}

#[test]
fn potential_throughput_peaks_at_moderate_density() {
    let t = SirThreshold::from_db(5.0).unwrap();
    let rates: Vec<f64> = [20.0, 200.0, 1200.0, 8000.0]
        .into_iter()
        .map(|lambda_km2| {
            let set = run(&spec(2.0, 0.5, 30, 20, 8), lambda_km2, 1.037, 0.5);
            empirical_potential_throughput(&set, lambda_km2 * 1e-6, t).unwrap().0
        })
        .collect();
    let best = (0..rates.len()).max_by(|&a, &b| rates[a].total_cmp(&rates[b])).unwrap();
    assert!(best > 0 && best < rates.len() - 1, "{rates:?}");
}

#[test]
fn ase_is_flat_when_beta_is_two() {
    let alpha = 1e-4;
    let expected = std::f64::consts::LOG2_E * alpha / PI;
    for lambda_km2 in [10.0, 100.0, 1000.0] {
        let set = run(&spec(4.0, 1.0, 100, 20, 3), lambda_km2, alpha, 2.0);
        let (e, se) = empirical_ase(&set, lambda_km2 * 1e-6).unwrap();
        assert!((e - expected).abs() < 4.0 * se, "{lambda_km2}: {e} ± {se} vs {expected}");
    }
}
