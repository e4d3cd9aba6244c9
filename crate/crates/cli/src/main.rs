//! `stretchnet`: coverage, rate and density analysis of Poisson cellular
//! networks with stretched exponential path loss.
//!
//! Densities are given in BS/km², thresholds in dB and distances in meters.
//! Exit status is 0 on success, 2 for invalid input and 3 when a numerical
//! method fails.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stretchnet::analytic::{CoverageMethod, CurveMethod};
use stretchnet::pathloss::Family;

#[derive(Parser)]
#[command(name = "stretchnet", version, about = "Stretched exponential path loss network analysis")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Coverage probability P(SIR >= theta).
    Coverage(PointArgs),
    /// Potential throughput lambda log2(1 + theta) P_cov in bps/Hz/m^2.
    Throughput(PointArgs),
    /// Area spectral efficiency in bps/Hz/m^2.
    Ase(AseArgs),
    /// Monte Carlo SIR samples.
    Simulate(SimulateArgs),
    /// Fit path-loss families to a measurement CSV.
    Fit(FitArgs),
    /// Sweep a metric over density or threshold.
    Sweep(SweepArgs),
    /// Throughput-maximising SIR threshold at a fixed density.
    OptimalTheta(OptimalThetaArgs),
    /// Write the data behind a figure as CSV plus JSON metadata.
    Figure(FigureArgs),
}

fn parse_with<T: std::str::FromStr<Err = stretchnet::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: stretchnet::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<CoverageMethod, String> {
    parse_with(s)
}

fn parse_curve_method(s: &str) -> Result<CurveMethod, String> {
    parse_with(s)
}

fn parse_family(s: &str) -> Result<Family, String> {
    parse_with(s)
}

#[derive(Args, Clone, Default)]
pub struct NetworkArgs {
    /// Base station density in BS/km^2.
    #[arg(long = "lambda")]
    pub lambda_bs_km2: Option<f64>,
    /// Attenuation rate alpha in m^-beta.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Distance exponent beta.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Noise power relative to unit transmit power.
    #[arg(long)]
    pub n0: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct QuadArgs {
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Subinterval budget of each adaptive quadrature.
    #[arg(long)]
    pub max_subdivisions: Option<usize>,
}

#[derive(Args, Clone, Default)]
pub struct SimArgs {
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Users dropped per realization.
    #[arg(long)]
    pub users: Option<usize>,
    /// Master seed of every random stream.
    #[arg(long, env = "STRETCHNET_SEED")]
    pub seed: Option<u64>,
    /// Side of the square in which base stations are dropped, km.
    #[arg(long)]
    pub outer_km: Option<f64>,
    /// Side of the central square in which users are dropped, km.
    #[arg(long)]
    pub inner_km: Option<f64>,
    /// Ignore interferers whose mean power is this many nats below the
    /// serving station's.
    #[arg(long, conflicts_with = "no_cutoff")]
    pub cutoff_nats: Option<f64>,
    /// Sum over every base station in the region.
    #[arg(long)]
    pub no_cutoff: bool,
}

#[derive(Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// SIR threshold in dB.
    #[arg(long = "theta-db", allow_hyphen_values = true)]
    pub theta_db: Option<f64>,
    /// Evaluation method; the cheapest exact one by default.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<CoverageMethod>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Args)]
pub struct AseArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<CoverageMethod>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Path-loss model as JSON text or a JSON file, instead of alpha/beta.
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Add the noise power to the interference.
    #[arg(long)]
    pub include_noise: bool,
    /// Thresholds in dB at which to report the empirical coverage.
    #[arg(long = "theta-db", allow_hyphen_values = true, value_delimiter = ',')]
    pub theta_db: Vec<f64>,
    /// Write the samples as CSV.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
pub struct FitArgs {
    /// Measurement CSV with columns r_m,gain_db.
    #[arg(long)]
    pub data: PathBuf,
    /// Families to fit; all of them by default.
    #[arg(long = "family", value_parser = parse_family, value_delimiter = ',')]
    pub families: Vec<Family>,
    /// Hold beta at this value.
    #[arg(long, conflicts_with = "polylog_beta")]
    pub fixed_beta: Option<f64>,
    /// Restrict beta to 2/(n+1).
    #[arg(long)]
    pub polylog_beta: bool,
    /// Optimizer starts per family.
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, env = "STRETCHNET_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: ReportFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// coverage, throughput or ase.
    #[arg(long)]
    pub metric: Option<String>,
    /// lambda (BS/km^2) or theta (dB).
    #[arg(long)]
    pub over: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Logarithmic grid spacing.
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Fixed threshold in dB when sweeping density.
    #[arg(long = "theta-db", allow_hyphen_values = true)]
    pub theta_db: Option<f64>,
    /// Methods, one curve each: coverage methods or monte-carlo.
    #[arg(long = "method", value_parser = parse_curve_method, value_delimiter = ',')]
    pub methods: Vec<CurveMethod>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct OptimalThetaArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub min_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub max_db: Option<f64>,
    /// Grid points before refinement.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<CoverageMethod>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Args)]
pub struct FigureArgs {
    /// fig1 to fig9, or all.
    #[arg(required = true)]
    pub ids: Vec<String>,
    #[arg(long, short, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, env = "STRETCHNET_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub users: Option<usize>,
    /// alpha of the beta = 0.5 figures.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// alpha for beta = 2, 1, 2/3, 0.5 in the multi-exponent figures.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub beta_alphas: Option<Vec<f64>>,
    /// Measurement CSV for fig2.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
