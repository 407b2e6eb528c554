//! Config-driven Monte-Carlo exploration of the exponent limit law.
//!
//! Many independent orbit pairs are drawn from the invariant samplers, each
//! pair's exponent curve is computed, and per-checkpoint quantiles are
//! aggregated and compared against a reference `1/C`. Pairs that hit an
//! exact-zero distance are excluded from the aggregates (a zero contaminates
//! every later quantile through the log) and reported separately.
//!
//! Every pair owns fixed RNG substreams derived from `(seed, pair index)`,
//! and aggregation reduces in pair order, so a report is byte-for-byte
//! identical no matter how many worker threads run the pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::orbitdist::{exponent_curve, observed_curve, CheckpointGrid};
use crate::rng::substream;
use crate::systems::{MapSystem, Observation, OrbitSource, SkewProduct};

fn default_pairs() -> usize {
    200
}
fn default_n_max() -> u64 {
    1_000_000
}
fn default_checkpoint_base() -> u64 {
    10
}
fn default_checkpoint_ratio() -> f64 {
    1.5
}

/// Base systems of the two random dynamical systems, present only in RDS
/// mode. The fiber families are the configured `system_t` / `system_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdsSpec {
    pub base_t: String,
    pub base_s: String,
}

/// Experiment definition, deserialized from the CLI JSON config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system_t: String,
    pub system_s: String,
    pub observation: String,
    #[serde(default)]
    pub rds: Option<RdsSpec>,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default = "default_checkpoint_base")]
    pub checkpoint_base: u64,
    #[serde(default = "default_checkpoint_ratio")]
    pub checkpoint_ratio: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reference_c: Option<f64>,
    #[serde(default)]
    pub out_csv: Option<String>,
    #[serde(default)]
    pub out_json: Option<String>,
}

impl ExperimentConfig {
    /// A minimal config for library use.
    pub fn new(system_t: &str, system_s: &str, observation: &str) -> Self {
        ExperimentConfig {
            system_t: system_t.into(),
            system_s: system_s.into(),
            observation: observation.into(),
            rds: None,
            pairs: default_pairs(),
            n_max: default_n_max(),
            checkpoint_base: default_checkpoint_base(),
            checkpoint_ratio: default_checkpoint_ratio(),
            seed: 0,
            reference_c: None,
            out_csv: None,
            out_json: None,
        }
    }
}

/// The reference divergence a report is compared against, with its origin
/// (`"analytic"`, `"renyi-fit"`, or `"config"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceC {
    pub c: f64,
    pub inverse: f64,
    pub source: String,
}

impl ReferenceC {
    pub fn new(c: f64, source: &str) -> Self {
        ReferenceC {
            c,
            inverse: 1.0 / c,
            source: source.into(),
        }
    }

    pub fn analytic(c: f64) -> Self {
        Self::new(c, "analytic")
    }

    pub fn fitted(c: f64) -> Self {
        Self::new(c, "renyi-fit")
    }
}

/// One pair's contribution to the experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub pair: usize,
    /// Exponents along the exponent checkpoints; empty when excluded.
    pub exponents: Vec<f64>,
    pub terminal_exponent: Option<f64>,
    pub excluded: bool,
    pub zero_hit: Option<u64>,
}

/// Exponent quantiles at one checkpoint, over the included pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub n: u64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
}

/// Aggregated experiment result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Checkpoints of the exponent curves (grid entries with `n >= 2`).
    pub checkpoints: Vec<u64>,
    pub quantiles: Vec<QuantileRow>,
    pub reference: Option<ReferenceC>,
    pub excluded_pairs: usize,
    pub per_pair: Vec<PairOutcome>,
}

impl ExperimentReport {
    pub fn terminal_quantiles(&self) -> Option<&QuantileRow> {
        self.quantiles.last()
    }

    /// Median terminal exponent over included pairs.
    pub fn median_terminal_exponent(&self) -> Option<f64> {
        self.terminal_quantiles().map(|q| q.median)
    }
}

enum Mode {
    Deterministic(MapSystem, MapSystem),
    Rds(SkewProduct, SkewProduct),
}

struct Resolved {
    mode: Mode,
    obs: Observation,
    checkpoints: Vec<u64>,
}

fn resolve(config: &ExperimentConfig, want_rds: bool) -> Result<Resolved, ConfigError> {
    if config.pairs < 1 {
        return Err(ConfigError::invalid("pairs", "must be at least 1"));
    }
    if config.n_max < 10 {
        return Err(ConfigError::invalid("n_max", "must be at least 10"));
    }
    if config.checkpoint_base < 1 {
        return Err(ConfigError::invalid("checkpoint_base", "must be at least 1"));
    }
    if !(config.checkpoint_ratio > 1.0) {
        return Err(ConfigError::invalid("checkpoint_ratio", "must exceed 1"));
    }
    if let Some(c) = config.reference_c {
        if !(c > 0.0) {
            return Err(ConfigError::invalid("reference_c", "must be positive"));
        }
    }
    let obs = Observation::parse(&config.observation)?;
    let sys_t = MapSystem::parse(&config.system_t)?;
    let sys_s = MapSystem::parse(&config.system_s)?;
    let mode = match (&config.rds, want_rds) {
        (None, false) => Mode::Deterministic(sys_t, sys_s),
        (Some(spec), true) => {
            let base_t = MapSystem::parse(&spec.base_t)?;
            let base_s = MapSystem::parse(&spec.base_s)?;
            let id_t = format!("skew:{}/{}", spec.base_t, config.system_t);
            let id_s = format!("skew:{}/{}", spec.base_s, config.system_s);
            Mode::Rds(
                SkewProduct::new(id_t, base_t, crate::systems::FiberFamily::Constant(sys_t)),
                SkewProduct::new(id_s, base_s, crate::systems::FiberFamily::Constant(sys_s)),
            )
        }
        (None, true) => {
            return Err(ConfigError::invalid("rds", "RDS run requires base systems"));
        }
        (Some(_), false) => {
            return Err(ConfigError::invalid(
                "rds",
                "config declares an RDS but a deterministic run was requested",
            ));
        }
    };
    // observed dimensions must agree between the two orbit families
    let (dim_t, dim_s) = match &mode {
        Mode::Deterministic(t, s) => (t.dim, s.dim),
        Mode::Rds(t, s) => (t.fiber_system().dim, s.fiber_system().dim),
    };
    let od_t = obs
        .codomain_dim(dim_t)
        .map_err(|e| ConfigError::invalid("observation", e.to_string()))?;
    let od_s = obs
        .codomain_dim(dim_s)
        .map_err(|e| ConfigError::invalid("observation", e.to_string()))?;
    if od_t != od_s {
        return Err(ConfigError::invalid(
            "observation",
            "observed dimensions of the two systems differ",
        ));
    }
    let checkpoints =
        CheckpointGrid::new(config.checkpoint_base, config.checkpoint_ratio).generate(config.n_max);
    Ok(Resolved {
        mode,
        obs,
        checkpoints,
    })
}

fn pair_orbits(resolved: &Resolved, seed: u64, pair: usize) -> (OrbitSource, OrbitSource) {
    let p = pair as u64;
    match &resolved.mode {
        Mode::Deterministic(t, s) => (
            t.sample_orbit(substream(seed, 2 * p)),
            s.sample_orbit(substream(seed, 2 * p + 1)),
        ),
        // noise marginal and fiber marginal each get their own stream
        Mode::Rds(t, s) => {
            let _omega_t = t.base().sample_orbit(substream(seed, 4 * p));
            let _omega_s = s.base().sample_orbit(substream(seed, 4 * p + 2));
            (
                t.fiber_orbit_sampled(substream(seed, 4 * p + 1)),
                s.fiber_orbit_sampled(substream(seed, 4 * p + 3)),
            )
        }
    }
}

fn evaluate_pair(resolved: &Resolved, config: &ExperimentConfig, pair: usize) -> PairOutcome {
    let (orbit_t, orbit_s) = pair_orbits(resolved, config.seed, pair);
    let curve = observed_curve(
        orbit_t,
        orbit_s,
        &resolved.obs,
        config.n_max,
        &resolved.checkpoints,
    )
    .expect("validated configuration cannot produce a domain error");
    let excluded = curve.zero_hit.is_some();
    let exponents = exponent_curve(&curve);
    PairOutcome {
        pair,
        terminal_exponent: if excluded {
            None
        } else {
            exponents.terminal_exponent()
        },
        exponents: if excluded { Vec::new() } else { exponents.exponent },
        excluded,
        zero_hit: curve.zero_hit,
    }
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Aggregate per-pair outcomes into quantile rows. Public so degenerate
/// inputs (forced coincident pairs) can be fed through the same reduction
/// the full runs use.
pub fn aggregate(
    config: &ExperimentConfig,
    checkpoints: &[u64],
    outcomes: Vec<PairOutcome>,
    reference: Option<ReferenceC>,
) -> ExperimentReport {
    let excluded_pairs = outcomes.iter().filter(|o| o.excluded).count();
    let mut quantiles = Vec::with_capacity(checkpoints.len());
    for (k, &n) in checkpoints.iter().enumerate() {
        let mut values: Vec<f64> = outcomes
            .iter()
            .filter(|o| !o.excluded)
            .map(|o| o.exponents[k])
            .collect();
        values.sort_unstable_by(f64::total_cmp);
        let row = if values.is_empty() {
            QuantileRow {
                n,
                q10: f64::NAN,
                median: f64::NAN,
                q90: f64::NAN,
            }
        } else {
            QuantileRow {
                n,
                q10: quantile(&values, 0.10),
                median: quantile(&values, 0.50),
                q90: quantile(&values, 0.90),
            }
        };
        quantiles.push(row);
    }
    ExperimentReport {
        config: config.clone(),
        checkpoints: checkpoints.to_vec(),
        quantiles,
        reference,
        excluded_pairs,
        per_pair: outcomes,
    }
}

fn run_resolved(config: &ExperimentConfig, resolved: &Resolved) -> ExperimentReport {
    let outcomes: Vec<PairOutcome> = (0..config.pairs)
        .into_par_iter()
        .map(|pair| evaluate_pair(resolved, config, pair))
        .collect();
    let exp_checkpoints: Vec<u64> = resolved
        .checkpoints
        .iter()
        .copied()
        .filter(|&n| n >= 2)
        .collect();
    let reference = config.reference_c.map(|c| ReferenceC::new(c, "config"));
    aggregate(config, &exp_checkpoints, outcomes, reference)
}

/// Run the deterministic limit-law experiment described by `config`.
pub fn run_limit_law(config: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    let resolved = resolve(config, false)?;
    Ok(run_resolved(config, &resolved))
}

/// Run the random-dynamical-system limit-law experiment: starts are sampled
/// from the product of the base and fiber marginals.
pub fn run_rds_limit_law(config: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    let resolved = resolve(config, true)?;
    Ok(run_resolved(config, &resolved))
}

/// Dispatch on the presence of the `rds` block.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    if config.rds.is_some() {
        run_rds_limit_law(config)
    } else {
        run_limit_law(config)
    }
}

/// Result of checking the one-sided decay bound: the exponent's q90 should
/// not exceed `1/C_lower` by more than `slack`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub per_checkpoint: Vec<bool>,
    /// Verdict at the largest checkpoint.
    pub pass: bool,
    /// True when every pair was excluded and the check is vacuous.
    pub vacuous: bool,
}

/// Default slack added to `1/C` by [`one_sided_bound_check`].
pub const DEFAULT_BOUND_SLACK: f64 = 0.2;

/// Check `q90(exponent at n) <= 1/c_lower + slack` per checkpoint.
pub fn one_sided_bound_check(report: &ExperimentReport, c_lower: f64, slack: f64) -> BoundCheck {
    assert!(c_lower > 0.0, "C lower bound must be positive");
    let vacuous = report.per_pair.len() == report.excluded_pairs;
    if vacuous {
        return BoundCheck {
            per_checkpoint: vec![true; report.quantiles.len()],
            pass: true,
            vacuous: true,
        };
    }
    let threshold = 1.0 / c_lower + slack;
    let per_checkpoint: Vec<bool> = report.quantiles.iter().map(|q| q.q90 <= threshold).collect();
    let pass = per_checkpoint.last().copied().unwrap_or(true);
    BoundCheck {
        per_checkpoint,
        pass,
        vacuous: false,
    }
}
