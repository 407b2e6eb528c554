//! Command-line front end: `simulate`, `distance`, `renyi`, `diagnose`,
//! `experiment`.
//!
//! Every subcommand is a thin adapter around the library: parse flags, call
//! the corresponding library function, format CSV/JSON/SVG. No numerical
//! logic lives here. Exit codes: 0 on success, 1 for runtime estimation
//! failures, 2 for usage and configuration errors.

pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::diagnostics::{annuli_regularity, correlation_decay, observed_samples, DecayOutcome};
use crate::error::{ConfigError, DomainError, EstimateError};
use crate::experiment::{run, ExperimentConfig, ExperimentReport};
use crate::orbitdist::{exponent_curve, observed_curve, CheckpointGrid, DistanceCurve};
use crate::renyi::{cross_correlation_curve, fit_divergence, RadiiSchedule};
use crate::rng::{substream, uniform_point};
use crate::systems::{parse_decimal_point, MapSystem, Observation};
use plot::PlotSeries;

/// Render a float with 15 significant digits, trimmed (`0.15`, not
/// `0.15000000000000001`): round to 15 significant decimal digits, then let
/// the shortest round-trip formatter print the result. Locale-independent:
/// always a `.` separator, scientific notation outside `[1e-5, 1e15)`.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Estimate(EstimateError),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Estimate(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Estimate(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        CliError::Estimate(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Domain errors reached from the CLI mean bad user-supplied values.
impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Config(ConfigError::Malformed(e.to_string()))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "orbitmatch",
    version,
    about = "Shortest synchronized distances between observed orbits of dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit an orbit of a built-in system as CSV.
    Simulate(SimulateArgs),
    /// Shortest-distance and exponent curve for one orbit pair.
    Distance(DistanceArgs),
    /// Cross-correlation curve and divergence fit from sample clouds.
    Renyi(RenyiArgs),
    /// Empirical hypothesis checks.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
    /// Config-driven Monte-Carlo limit-law experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// System id: doubling | tripling | base:N | rotation:R
    #[arg(long)]
    system: String,
    /// Exact decimal start, comma-separated per coordinate (e.g. 0.1)
    #[arg(long, conflicts_with = "seed")]
    x: Option<String>,
    /// Draw the start from the invariant measure with this seed
    #[arg(long)]
    seed: Option<u64>,
    /// Orbit length
    #[arg(short = 'n', long, value_name = "STEPS")]
    n: u64,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    #[arg(long = "system-t")]
    system_t: String,
    #[arg(long = "system-s")]
    system_s: String,
    /// Observation id: identity | proj:K | affine:A:B | dist:P
    #[arg(long)]
    obs: String,
    /// Exact decimal start of the first orbit
    #[arg(long)]
    x: String,
    /// Exact decimal start of the second orbit
    #[arg(long)]
    y: String,
    /// Maximum orbit length
    #[arg(short = 'n', long, value_name = "STEPS")]
    n: u64,
    /// Explicit comma-separated checkpoints (default: geometric grid)
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long, default_value_t = 10)]
    checkpoint_base: u64,
    #[arg(long, default_value_t = 1.5)]
    checkpoint_ratio: f64,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an exponent-convergence SVG plot here
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenyiArgs {
    /// Sample count (uniform draws) or a file of points, one per line
    #[arg(long = "samples-mu")]
    samples_mu: String,
    /// Sample count (uniform draws) or a file of points, one per line
    #[arg(long = "samples-eta")]
    samples_eta: String,
    /// Observation applied to the samples before counting
    #[arg(long, default_value = "identity")]
    obs: String,
    #[arg(long = "r-max", default_value_t = 0.25)]
    r_max: f64,
    /// Number of radii in the schedule
    #[arg(short = 'k', long, default_value_t = 8)]
    k: usize,
    /// Radius ratio between consecutive scales
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (default: stdout)
    #[arg(long = "out-csv")]
    out_csv: Option<PathBuf>,
    /// Output path for the JSON fit record (default: stdout after the CSV)
    #[arg(long = "out-json")]
    out_json: Option<PathBuf>,
    /// Write a log-log correlation SVG plot here
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum DiagnoseCommand {
    /// Decay of correlations for a pair of Lipschitz observables.
    H1(H1Args),
    /// Annuli-regularity measurement of a pushforward measure.
    H2(H2Args),
}

#[derive(Args, Debug)]
struct H1Args {
    #[arg(long)]
    system: String,
    /// First observable (scalar-valued observation id)
    #[arg(long)]
    psi: String,
    /// Second observable (scalar-valued observation id)
    #[arg(long)]
    phi: String,
    /// Comma-separated lags (e.g. 1,2,4,8)
    #[arg(long, conflicts_with = "lags_upto")]
    lags: Option<String>,
    /// Use all lags 1..=N
    #[arg(long = "lags-upto")]
    lags_upto: Option<u64>,
    /// Monte-Carlo sample count
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output path for the JSON fit record
    #[arg(long = "out-json")]
    out_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct H2Args {
    #[arg(long)]
    system: String,
    #[arg(long, default_value = "identity")]
    obs: String,
    /// Monte-Carlo sample count for the measure
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Number of annulus centers
    #[arg(long, default_value_t = 200)]
    centers: usize,
    /// Comma-separated annulus radii
    #[arg(long = "r-grid", default_value = "0.05,0.025,0.0125")]
    r_grid: String,
    /// Comma-separated annulus half-widths
    #[arg(long = "rho-grid", default_value = "0.01,0.005,0.0025")]
    rho_grid: String,
    #[arg(long, default_value_t = 0.5)]
    xi: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON experiment config path
    #[arg(long)]
    config: PathBuf,
    /// Write an exponent-quantile SVG plot here
    #[arg(long)]
    svg: Option<PathBuf>,
}

/// Parse arguments and run; returns the process exit code. Output goes to
/// `out` so tests can capture it.
pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_command(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// As [`dispatch_to`], writing to standard output.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    dispatch_to(argv, &mut lock)
}

fn run_command(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => simulate(args, out),
        Command::Distance(args) => distance(args, out),
        Command::Renyi(args) => renyi(args, out),
        Command::Diagnose(DiagnoseCommand::H1(args)) => diagnose_h1(args, out),
        Command::Diagnose(DiagnoseCommand::H2(args)) => diagnose_h2(args, out),
        Command::Experiment(args) => experiment(args, out),
    }
}

/// Write `text` to the path, or to the fallback stream when no path given.
fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_row(fields: &[String]) -> String {
    let mut row = fields.join(",");
    row.push('\n');
    row
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let system = MapSystem::parse(&args.system)?;
    if args.n < 1 {
        return Err(ConfigError::invalid("n", "orbit length must be at least 1").into());
    }
    let mut orbit = match (&args.x, args.seed) {
        (Some(x), None) => {
            let point = parse_decimal_point(x)?;
            system.orbit_from_decimal(&point)?
        }
        (None, seed) => system.sample_orbit(substream(seed.unwrap_or(0), 0)),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };

    let mut csv = String::new();
    let header: Vec<String> = std::iter::once("i".to_string())
        .chain((0..system.dim).map(|k| format!("x{k}")))
        .collect();
    csv.push_str(&csv_row(&header));
    let mut state = vec![0.0; system.dim];
    for i in 0..args.n {
        orbit.write_state(&mut state);
        let fields: Vec<String> = std::iter::once(i.to_string())
            .chain(state.iter().map(|&v| format_float(v)))
            .collect();
        csv.push_str(&csv_row(&fields));
        orbit.advance();
    }
    emit(&args.out, &csv, out)
}

fn parse_u64_list(s: &str, field: &str) -> Result<Vec<u64>, ConfigError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| ConfigError::invalid(field, format!("{p:?} is not an integer")))
        })
        .collect()
}

fn parse_f64_list(s: &str, field: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError::invalid(field, format!("{p:?} is not a number")))
        })
        .collect()
}

fn distance_csv(curve: &DistanceCurve) -> String {
    let exponents = exponent_curve(curve);
    let mut csv = String::from("n,prefix_min,exponent,floor_applied\n");
    for (k, &n) in curve.checkpoints.iter().enumerate() {
        let (exp, floor) = match exponents.checkpoints.iter().position(|&m| m == n) {
            Some(i) => (
                format_float(exponents.exponent[i]),
                exponents.floor_applied[i].to_string(),
            ),
            // the exponent is undefined at n = 1
            None => (String::new(), "false".to_string()),
        };
        csv.push_str(&csv_row(&[
            n.to_string(),
            format_float(curve.prefix_min[k]),
            exp,
            floor,
        ]));
    }
    csv
}

fn distance(args: DistanceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sys_t = MapSystem::parse(&args.system_t)?;
    let sys_s = MapSystem::parse(&args.system_s)?;
    let obs = Observation::parse(&args.obs)?;
    let x = parse_decimal_point(&args.x)?;
    let y = parse_decimal_point(&args.y)?;
    let checkpoints = match &args.checkpoints {
        Some(list) => parse_u64_list(list, "checkpoints")?,
        None => CheckpointGrid::new(args.checkpoint_base, args.checkpoint_ratio).generate(args.n),
    };
    let curve = observed_curve(
        sys_t.orbit_from_decimal(&x)?,
        sys_s.orbit_from_decimal(&y)?,
        &obs,
        args.n,
        &checkpoints,
    )?;
    emit(&args.out, &distance_csv(&curve), out)?;

    if let Some(svg_path) = &args.svg {
        let exponents = exponent_curve(&curve);
        let series = PlotSeries {
            label: "exponent".into(),
            points: exponents
                .checkpoints
                .iter()
                .zip(exponents.exponent.iter())
                .map(|(&n, &e)| (n as f64, e))
                .collect(),
        };
        let svg = plot::render_log_x_plot(
            &[series],
            None,
            "exponent convergence",
            "n (log scale)",
            "log m_n / (-log n)",
        )?;
        fs::write(svg_path, svg)?;
    }
    Ok(())
}

/// A cloud argument is either a count of uniform draws or a file of points.
fn load_cloud(arg: &str, seed: u64, stream: u64) -> Result<Vec<Vec<f64>>, CliError> {
    if let Ok(count) = arg.parse::<usize>() {
        if count == 0 {
            return Err(ConfigError::invalid("samples", "count must be positive").into());
        }
        let mut rng = substream(seed, stream);
        return Ok((0..count).map(|_| uniform_point(&mut rng, 1)).collect());
    }
    let content = fs::read_to_string(arg).map_err(|e| {
        CliError::Config(ConfigError::invalid(
            "samples",
            format!("{arg:?} is neither a count nor a readable file: {e}"),
        ))
    })?;
    let mut points = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = parse_f64_list(line, "samples").map_err(|_| {
            ConfigError::invalid("samples", format!("bad point on line {}", lineno + 1))
        })?;
        points.push(coords);
    }
    if points.is_empty() {
        return Err(ConfigError::invalid("samples", format!("{arg:?} holds no points")).into());
    }
    Ok(points)
}

fn renyi(args: RenyiArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let obs = Observation::parse(&args.obs)?;
    let schedule = RadiiSchedule::new(args.r_max, args.k, args.ratio)
        .map_err(|e| ConfigError::invalid("radii", e.to_string()))?;
    let mu = load_cloud(&args.samples_mu, args.seed, 0)?;
    let eta = load_cloud(&args.samples_eta, args.seed, 1)?;

    let observe = |cloud: Vec<Vec<f64>>| -> Result<Vec<Vec<f64>>, CliError> {
        let mut value = Vec::new();
        let mut observed = Vec::with_capacity(cloud.len());
        for p in &cloud {
            obs.codomain_dim(p.len())?;
            obs.apply(p, &mut value);
            observed.push(value.clone());
        }
        Ok(observed)
    };
    let (mu, eta) = (observe(mu)?, observe(eta)?);
    let estimate = cross_correlation_curve(&mu, &eta, &schedule, obs.value_metric())?;

    let mut csv = String::from("r,count,value\n");
    for k in 0..estimate.radii.len() {
        csv.push_str(&csv_row(&[
            format_float(estimate.radii[k]),
            estimate.pair_counts[k].to_string(),
            format_float(estimate.values[k]),
        ]));
    }
    emit(&args.out_csv, &csv, out)?;

    let fit = fit_divergence(&estimate, None)?;
    let record = json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "window": [fit.fit_window.0, fit.fit_window.1],
        "dropped_radii": fit.dropped_radii,
    });
    let mut line = record.to_string();
    line.push('\n');
    emit(&args.out_json, &line, out)?;

    if let Some(svg_path) = &args.svg {
        let series = PlotSeries {
            label: "C(r)".into(),
            points: estimate
                .radii
                .iter()
                .zip(estimate.values.iter())
                .filter(|(_, &v)| v > 0.0)
                .map(|(&r, &v)| (r, v.ln()))
                .collect(),
        };
        let svg = plot::render_log_x_plot(
            &[series],
            None,
            "cross-correlation integral",
            "r (log scale)",
            "log C(r)",
        )?;
        fs::write(svg_path, svg)?;
    }
    Ok(())
}

fn diagnose_h1(args: H1Args, out: &mut dyn Write) -> Result<(), CliError> {
    let system = MapSystem::parse(&args.system)?;
    let psi = Observation::parse(&args.psi)?;
    let phi = Observation::parse(&args.phi)?;
    let lags = match (&args.lags, args.lags_upto) {
        (Some(list), None) => parse_u64_list(list, "lags")?,
        (None, Some(n)) => (1..=n).collect(),
        (None, None) => vec![1, 2, 4, 8, 16, 32, 64],
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let fit = correlation_decay(&system, &psi, &phi, &lags, args.samples, args.seed)?;

    let mut csv = String::from("lag,cov\n");
    for (lag, cov) in fit.lags.iter().zip(fit.covariances.iter()) {
        csv.push_str(&csv_row(&[lag.to_string(), format_float(*cov)]));
    }
    emit(&args.out, &csv, out)?;

    let record = match &fit.outcome {
        DecayOutcome::Fitted {
            a,
            alpha,
            residual,
            envelope_holds,
            envelope_violations,
        } => json!({
            "outcome": "fitted",
            "a": a,
            "alpha": alpha,
            "residual": residual,
            "envelope_holds": envelope_holds,
            "envelope_violations": envelope_violations,
            "noise_floor": fit.noise_floor,
        }),
        DecayOutcome::IndistinguishableFromZero => json!({
            "outcome": "indistinguishable-from-zero",
            "noise_floor": fit.noise_floor,
        }),
    };
    if args.out_json.is_some() {
        let mut line = record.to_string();
        line.push('\n');
        emit(&args.out_json, &line, out)?;
    } else {
        eprintln!("{record}");
    }
    Ok(())
}

fn diagnose_h2(args: H2Args, out: &mut dyn Write) -> Result<(), CliError> {
    let system = MapSystem::parse(&args.system)?;
    let obs = Observation::parse(&args.obs)?;
    let r_grid = parse_f64_list(&args.r_grid, "r-grid")?;
    let rho_grid = parse_f64_list(&args.rho_grid, "rho-grid")?;
    let mut sample_rng = substream(args.seed, 0);
    let mut center_rng = substream(args.seed, 1);
    let samples = observed_samples(&system, &obs, args.samples, &mut sample_rng)?;
    let centers = observed_samples(&system, &obs, args.centers, &mut center_rng)?;
    let report = annuli_regularity(
        &samples,
        &centers,
        &r_grid,
        &rho_grid,
        args.xi,
        args.beta,
        obs.value_metric(),
    )?;

    let mut csv = String::from("r,rho,mass,bound,ratio\n");
    for e in &report.entries {
        csv.push_str(&csv_row(&[
            format_float(e.r),
            format_float(e.rho),
            format_float(e.mass),
            format_float(e.bound),
            format_float(e.ratio),
        ]));
    }
    emit(&args.out, &csv, out)?;
    eprintln!(
        "max violation ratio {} over {} grid points",
        format_float(report.max_violation_ratio),
        report.entries.len()
    );
    Ok(())
}

fn experiment_csv(report: &ExperimentReport) -> String {
    let reference = report
        .reference
        .as_ref()
        .map(|r| format_float(r.inverse))
        .unwrap_or_default();
    let mut csv = String::from("n,q10,median,q90,reference\n");
    for row in &report.quantiles {
        csv.push_str(&csv_row(&[
            row.n.to_string(),
            format_float(row.q10),
            format_float(row.median),
            format_float(row.q90),
            reference.clone(),
        ]));
    }
    csv
}

fn experiment(args: ExperimentArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let content = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(ConfigError::Malformed(format!(
            "cannot read config {:?}: {e}",
            args.config
        )))
    })?;
    let config: ExperimentConfig = serde_json::from_str(&content)
        .map_err(|e| CliError::Config(ConfigError::Malformed(format!("bad config: {e}"))))?;
    let report = run(&config)?;

    let csv_path = config.out_csv.as_ref().map(PathBuf::from);
    emit(&csv_path, &experiment_csv(&report), out)?;

    if let Some(json_path) = &config.out_json {
        let mut text =
            serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
        text.push('\n');
        fs::write(json_path, text)?;
    }

    if let Some(svg_path) = &args.svg {
        let picks: [(&str, fn(&crate::experiment::QuantileRow) -> f64); 3] = [
            ("q10", |r| r.q10),
            ("median", |r| r.median),
            ("q90", |r| r.q90),
        ];
        let series: Vec<PlotSeries> = picks
            .iter()
            .map(|(label, pick)| PlotSeries {
                label: (*label).into(),
                points: report
                    .quantiles
                    .iter()
                    .map(|row| (row.n as f64, pick(row)))
                    .filter(|&(_, y)| y.is_finite())
                    .collect(),
            })
            .collect();
        let svg = plot::render_log_x_plot(
            &series,
            report.reference.as_ref().map(|r| r.inverse),
            "exponent quantiles",
            "n (log scale)",
            "log m_n / (-log n)",
        )?;
        fs::write(svg_path, svg)?;
    }
    Ok(())
}
