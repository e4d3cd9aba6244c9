use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::json;

use stretchnet::analytic::{
    ase, ase_limit, ase_upper_bound, coverage, potential_throughput, select_method, CoverageMethod, SirThreshold,
};
use stretchnet::fitting::{fit_report, FitConstraint, FitOptions, MeasurementDataset};
use stretchnet::montecarlo::{empirical_coverage, simulate, simulate_model, write_samples_csv, SimulationSpec};
use stretchnet::pathloss::{Family, PathLossModel};
use stretchnet::quadrature::QuadConfig;
use stretchnet::sweep::{
    optimal_threshold, reproduce_figure, run_sweep, write_curves_csv, Abscissa, Config, FigureId, FigureOptions,
    GridSpec, NetworkConfig, NetworkSpec, Spacing, SweepMetric, SweepSpec, PER_KM2,
};
use stretchnet::{Error, NetworkParams, Result};

use crate::{
    AseArgs, Cli, Command, FigureArgs, FitArgs, NetworkArgs, OptimalThetaArgs, PointArgs, QuadArgs, ReportFormat,
    SimArgs, SimulateArgs, SweepArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("cannot start {n} worker threads: {e}")))?;
    }
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Coverage(a) => point(&config, a, false),
        Command::Throughput(a) => point(&config, a, true),
        Command::Ase(a) => area_efficiency(&config, a),
        Command::Simulate(a) => simulate_cmd(&config, a),
        Command::Fit(a) => fit_cmd(&config, a),
        Command::Sweep(a) => sweep_cmd(&config, a),
        Command::OptimalTheta(a) => optimal_theta(&config, a),
        Command::Figure(a) => figure(&config, a),
    }
}

fn network(config: &Config, args: &NetworkArgs) -> Result<NetworkSpec> {
    let flags = NetworkConfig {
        lambda_bs_km2: args.lambda_bs_km2,
        alpha: args.alpha,
        beta: args.beta,
        n0: args.n0,
    };
    config.network.merged(flags).resolve()
}

fn quadrature(base: Option<QuadConfig>, args: &QuadArgs) -> QuadConfig {
    let mut q = base.unwrap_or_default();
    if let Some(v) = args.abs_tol {
        q.abs_tol = v;
    }
    if let Some(v) = args.rel_tol {
        q.rel_tol = v;
    }
    if let Some(v) = args.max_subdivisions {
        q.max_subdivisions = v;
    }
    q
}

fn check_quadrature(q: &QuadConfig) -> Result<()> {
    let ok = q.abs_tol >= 0.0 && q.rel_tol >= 0.0 && q.abs_tol + q.rel_tol > 0.0 && q.max_subdivisions >= 1;
    if ok {
        Ok(())
    } else {
        Err(Error::Validation("quadrature tolerances must be >= 0, not both zero, with at least one subdivision".into()))
    }
}

fn simulation(base: Option<&SimulationSpec>, args: &SimArgs) -> SimulationSpec {
    let mut s = base.cloned().unwrap_or_default();
    if let Some(v) = args.realizations {
        s.realizations = v;
    }
    if let Some(v) = args.users {
        s.users_per_realization = v;
    }
    if let Some(v) = args.seed {
        s.master_seed = v;
    }
    if let Some(v) = args.outer_km {
        s.outer_region_km = v;
    }
    if let Some(v) = args.inner_km {
        s.inner_region_km = v;
    }
    if let Some(v) = args.cutoff_nats {
        s.cutoff_nats = Some(v);
    }
    if args.no_cutoff {
        s.cutoff_nats = None;
    }
    s
}

fn threshold(config: &Config, flag: Option<f64>) -> Result<f64> {
    flag.or(config.theta_db)
        .ok_or_else(|| Error::Validation("missing SIR threshold (--theta-db)".into()))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = sink(None)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn network_json(net: &NetworkSpec) -> serde_json::Value {
    json!({
        "lambda_bs_km2": net.lambda_bs_km2,
        "alpha": net.alpha,
        "beta": net.beta,
        "n0": net.n0,
    })
}

fn method_used(method: Option<CoverageMethod>, params: &NetworkParams) -> CoverageMethod {
    method.unwrap_or_else(|| select_method(params))
}

fn point(config: &Config, a: PointArgs, rate: bool) -> Result<()> {
    let net = network(config, &a.network)?;
    let params = net.params()?;
    let db = threshold(config, a.theta_db)?;
    let theta = SirThreshold::from_db(db)?;
    let method = a.method.or(config.method);
    let q = quadrature(config.quadrature, &a.quad);
    check_quadrature(&q)?;
    if let Some(m) = method {
        m.check(&params)?;
    }
    let (metric, e) = if rate {
        ("potential_throughput", potential_throughput(&params, theta, method, &q)?)
    } else {
        ("coverage", coverage(&params, theta, method, &q)?)
    };
    print_json(&json!({
        "metric": metric,
        "method": method_used(method, &params).name(),
        "value": e.value,
        "abs_error": e.abs_error,
        "theta_db": db,
        "network": network_json(&net),
    }))
}

fn area_efficiency(config: &Config, a: AseArgs) -> Result<()> {
    let net = network(config, &a.network)?;
    let params = net.params()?;
    let method = a.method.or(config.method);
    let q = quadrature(config.quadrature, &a.quad);
    check_quadrature(&q)?;
    if let Some(m) = method {
        m.check(&params)?;
    }
    let e = ase(&params, method, &q)?;
    print_json(&json!({
        "metric": "ase",
        "method": method_used(method, &params).name(),
        "value": e.value,
        "abs_error": e.abs_error,
        "dense_limit": ase_limit(&params),
        "upper_bound": params.polylog_order().map(|n| ase_upper_bound(params.alpha, n)),
        "network": network_json(&net),
    }))
}

fn load_model(text: &str) -> Result<PathLossModel> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        PathLossModel::from_json(trimmed)
    } else {
        PathLossModel::from_json(&std::fs::read_to_string(text)?)
    }
}

fn simulate_cmd(config: &Config, a: SimulateArgs) -> Result<()> {
    let mut spec = simulation(config.simulation.as_ref(), &a.sim);
    spec.include_noise |= a.include_noise;
    let samples = match &a.model {
        Some(text) => {
            let model = load_model(text)?;
            let lambda = a
                .network
                .lambda_bs_km2
                .or(config.network.lambda_bs_km2)
                .ok_or_else(|| Error::Validation("missing network parameter 'lambda_bs_km2'".into()))?;
            let noise = a.network.n0.or(config.network.n0).filter(|_| spec.include_noise);
            if spec.include_noise && noise.is_none() {
                return Err(Error::Validation("--include-noise needs --n0".into()));
            }
            simulate_model(&spec, lambda * PER_KM2, &model, noise)?
        }
        None => simulate(&spec, &network(config, &a.network)?.params()?)?,
    };
    for w in &samples.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &a.output {
        let mut out = sink(Some(path))?;
        write_samples_csv(&samples, &mut out)?;
        out.flush()?;
    }
    let thetas = if a.theta_db.is_empty() {
        config.theta_db.into_iter().collect()
    } else {
        a.theta_db
    };
    let mut cov = Vec::new();
    for db in thetas {
        let (p, se) = empirical_coverage(&samples, SirThreshold::from_db(db)?)?;
        cov.push(json!({"theta_db": db, "coverage": p, "standard_error": se}));
    }
    print_json(&json!({
        "samples": samples.len(),
        "redraws": samples.redraws,
        "warnings": samples.warnings,
        "simulation": spec,
        "coverage": cov,
        "output": a.output,
    }))
}

fn fit_cmd(config: &Config, a: FitArgs) -> Result<()> {
    let data = MeasurementDataset::read_csv(BufReader::new(File::open(&a.data)?))?;
    let mut opts = config.fit.clone().unwrap_or_default();
    if let Some(s) = a.starts {
        opts.starts = s;
    }
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    if let Some(b) = a.fixed_beta {
        opts.constraint = Some(FitConstraint::FixedBeta(b));
    }
    if a.polylog_beta {
        opts.constraint = Some(FitConstraint::PolylogBeta);
    }
    let families = if !a.families.is_empty() {
        a.families
    } else {
        config.families.clone().unwrap_or_else(|| default_families(&opts))
    };
    let report = fit_report(&data, &families, &opts);
    let mut out = sink(a.output.as_deref())?;
    match a.format {
        ReportFormat::Csv => report.write_csv(&mut out)?,
        ReportFormat::Json => writeln!(out, "{}", report.to_json()?)?,
    }
    out.flush()?;
    Ok(())
}

/// A β constraint only makes sense for the families that have a β.
fn default_families(opts: &FitOptions) -> Vec<Family> {
    match opts.constraint {
        Some(_) => vec![Family::PL1, Family::PL2, Family::PL10],
        None => Family::ALL.to_vec(),
    }
}

fn parse_name<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Validation(format!("unknown {what} '{s}'")))
}

fn sweep_cmd(config: &Config, a: SweepArgs) -> Result<()> {
    let base = config.sweep.clone();
    let metric = match &a.metric {
        Some(s) => parse_name::<SweepMetric>("metric", s)?,
        None => base.as_ref().map(|b| b.metric).ok_or_else(|| Error::Validation("missing --metric".into()))?,
    };
    let abscissa = match &a.over {
        Some(s) => parse_name::<Abscissa>("sweep variable", s)?,
        None => base.as_ref().map(|b| b.abscissa).ok_or_else(|| Error::Validation("missing --over".into()))?,
    };
    let grid = {
        let b = base.as_ref().map(|b| b.grid);
        let need = |flag: Option<f64>, from: Option<f64>, name: &str| {
            flag.or(from).ok_or_else(|| Error::Validation(format!("missing --{name}")))
        };
        GridSpec {
            min: need(a.min, b.map(|g| g.min), "min")?,
            max: need(a.max, b.map(|g| g.max), "max")?,
            points: a
                .points
                .or(b.map(|g| g.points))
                .ok_or_else(|| Error::Validation("missing --points".into()))?,
            spacing: if a.log { Spacing::Log } else { b.map_or(Spacing::Linear, |g| g.spacing) },
        }
    };
    // the swept variable need not be given
    let mut net_flags = a.network.clone();
    if abscissa == Abscissa::Lambda && net_flags.lambda_bs_km2.is_none() {
        net_flags.lambda_bs_km2 = Some(grid.min.max(f64::MIN_POSITIVE));
    }
    let mut file_net = config.network;
    if let Some(b) = &base {
        file_net = NetworkConfig {
            lambda_bs_km2: Some(b.network.lambda_bs_km2),
            alpha: Some(b.network.alpha),
            beta: Some(b.network.beta),
            n0: b.network.n0,
        }
        .merged(file_net);
    }
    let network = {
        let cfg = Config {
            network: file_net,
            ..Config::default()
        };
        self::network(&cfg, &net_flags)?
    };
    let methods = if !a.methods.is_empty() {
        a.methods
    } else if let Some(b) = &base {
        b.methods.clone()
    } else {
        vec![stretchnet::analytic::CurveMethod::Analytic(method_used(config.method, &network.params()?))]
    };
    let spec = SweepSpec {
        metric,
        abscissa,
        grid,
        network,
        theta_db: a
            .theta_db
            .or(config.theta_db)
            .or(base.as_ref().map(|b| b.theta_db))
            .unwrap_or(5.0),
        methods,
        simulation: simulation(base.as_ref().map(|b| &b.simulation).or(config.simulation.as_ref()), &a.sim),
        quadrature: quadrature(base.as_ref().map(|b| b.quadrature).or(config.quadrature), &a.quad),
    };
    check_quadrature(&spec.quadrature)?;
    let curves = run_sweep(&spec)?;
    for c in &curves {
        for p in c.points.iter().filter(|p| p.y.is_none()) {
            eprintln!("warning: {} at {}: {}", c.label, p.x, p.note.as_deref().unwrap_or("no value"));
        }
    }
    let mut out = sink(a.output.as_deref())?;
    write_curves_csv(&curves, &mut out)?;
    out.flush()?;
    Ok(())
}

fn optimal_theta(config: &Config, a: OptimalThetaArgs) -> Result<()> {
    let net = network(config, &a.network)?;
    let params = net.params()?;
    let mut search = config.threshold_search.unwrap_or_default();
    if let Some(v) = a.min_db {
        search.min_db = v;
    }
    if let Some(v) = a.max_db {
        search.max_db = v;
    }
    if let Some(v) = a.points {
        search.points = v;
    }
    let q = quadrature(config.quadrature, &a.quad);
    check_quadrature(&q)?;
    let method = a.method.or(config.method);
    let opt = optimal_threshold(&params, &search, method, &q)?;
    if let Some(w) = &opt.warning {
        eprintln!("warning: {w}");
    }
    print_json(&json!({
        "theta_star_db": opt.theta.db(),
        "theta_star": opt.theta.linear(),
        "throughput": opt.throughput,
        "coverage": opt.coverage,
        "at_boundary": opt.at_boundary,
        "warning": opt.warning,
        "method": method_used(method, &params).name(),
        "search": search,
        "network": network_json(&net),
    }))
}

fn figure(config: &Config, a: FigureArgs) -> Result<()> {
    let mut ids = Vec::new();
    for s in &a.ids {
        if s.eq_ignore_ascii_case("all") {
            ids.extend(FigureId::ALL);
        } else {
            ids.push(s.parse::<FigureId>()?);
        }
    }
    let mut opts = config.figure.clone().unwrap_or_default();
    if let Some(v) = a.seed {
        opts.seed = v;
    }
    if let Some(v) = a.realizations {
        opts.realizations = v;
    }
    if let Some(v) = a.users {
        opts.users_per_realization = v;
    }
    if let Some(v) = a.alpha {
        opts.alpha = Some(v);
    }
    if let Some(v) = &a.beta_alphas {
        opts.beta_alphas = Some([v[0], v[1], v[2], v[3]]);
    }
    if let Some(v) = &a.dataset {
        opts.dataset = Some(v.clone());
    }
    if let Some(t) = config.threshold_search {
        opts.threshold_search = t;
    }
    opts.quadrature = quadrature(Some(opts.quadrature), &a.quad);
    check_quadrature(&opts.quadrature)?;
    check_figure_options(&opts)?;
    for id in ids {
        let out = reproduce_figure(id, &opts, &a.out_dir)?;
        let gaps: usize = out.curves.iter().map(|c| c.gaps()).sum();
        if gaps > 0 {
            eprintln!("warning: {id} has {gaps} missing points; see the note column");
        }
        println!("{}", out.csv.display());
        println!("{}", out.json.display());
    }
    Ok(())
}

fn check_figure_options(opts: &FigureOptions) -> Result<()> {
    SimulationSpec {
        realizations: opts.realizations,
        users_per_realization: opts.users_per_realization,
        ..Default::default()
    }
    .validate()?;
    let alphas = opts.alpha.into_iter().chain(opts.beta_alphas.into_iter().flatten());
    for a in alphas {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Validation(format!("alpha must be finite and > 0, got {a}")));
        }
    }
    Ok(())
}
