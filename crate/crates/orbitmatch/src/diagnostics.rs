//! Empirical checks of the mixing and regularity hypotheses.
//!
//! Two assumptions drive the limit law: stretched-exponential decay of
//! correlations for Lipschitz observables (`|cov(n)| <= K a^{n^alpha}` with
//! `0 <= a < 1`, `alpha > 0`) and a bound `r^-xi rho^beta` on the pushforward
//! measure of thin annuli. Neither can be *proved* numerically; this module
//! measures covariances and annulus masses and reports how the fitted
//! envelopes compare, nothing more. It also provides the piecewise-linear
//! mollifier kernel that interpolates between the indicator of `[0, r]` and
//! the indicator of `[0, (1+rho)r]`.

use serde::Serialize;

use crate::error::DomainError;
use crate::metric::ValueMetric;
use crate::renyi::PreparedCloud;
use crate::rng::{substream, Substream};
use crate::systems::{MapSystem, Observation};

/// Piecewise-linear approximation of the indicator of `[0, r]`: one on
/// `[0, r]`, zero from `(1+rho)r` on, `1 - (t-r)/(rho r)` in between, so the
/// kernel is exactly `1/(rho r)`-Lipschitz as a real function.
///
/// `eval` is the `f64` projection of that function (within 2 ulp of the ramp
/// value). Pointwise inequalities between *differences* of rounded ramp
/// values can drift by one ulp either way — that is inherent to rounding,
/// not to this kernel — so the exact Lipschitz and sandwich assertions are
/// verified against the formula in rational arithmetic, using the exact
/// dyadic values of `r`, `rho`, and `ramp_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifierKernel {
    pub r: f64,
    pub rho: f64,
    ramp_width: f64,
    support_end: f64,
}

impl MollifierKernel {
    pub fn new(r: f64, rho: f64) -> Result<Self, DomainError> {
        if r <= 0.0 {
            return Err(DomainError::NonPositiveRadius(r));
        }
        if rho <= 0.0 {
            return Err(DomainError::NonPositiveRadius(rho));
        }
        let ramp_width = rho * r;
        Ok(MollifierKernel {
            r,
            rho,
            ramp_width,
            support_end: r + ramp_width,
        })
    }

    /// Evaluate the kernel at `t >= 0`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t <= self.r {
            1.0
        } else if t >= self.support_end {
            0.0
        } else {
            (1.0 - (t - self.r) / self.ramp_width).clamp(0.0, 1.0)
        }
    }

    /// Width of the linear ramp, `rho * r`.
    pub fn ramp_width(&self) -> f64 {
        self.ramp_width
    }

    /// Where the kernel reaches zero, `(1 + rho) * r`.
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    /// The Lipschitz constant `1/(rho r)`.
    pub fn lipschitz(&self) -> f64 {
        1.0 / self.ramp_width
    }
}

/// Evaluate `kernel` at `t`.
pub fn mollifier_eval(kernel: &MollifierKernel, t: f64) -> f64 {
    kernel.eval(t)
}

/// Outcome of a correlation-decay measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DecayOutcome {
    /// Envelope parameters fitted on the lags above the noise floor.
    Fitted {
        a: f64,
        alpha: f64,
        /// Root-mean-square residual of `log|cov|` against the fitted model.
        residual: f64,
        /// Whether `K a^{n^alpha}` bounds every measured `|cov|`.
        envelope_holds: bool,
        /// Number of lags whose measured covariance exceeds the envelope.
        envelope_violations: usize,
    },
    /// Every covariance sits below the noise floor `3/sqrt(M)`: mixing is
    /// consistent with the data and no envelope is identifiable.
    IndistinguishableFromZero,
}

/// Monte-Carlo covariances per lag with a fitted decay envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub lags: Vec<u64>,
    /// `|cov(lag)|` estimated over `M` stationary starts.
    pub covariances: Vec<f64>,
    /// CLT scale `3/sqrt(M)` below which a covariance is treated as zero.
    pub noise_floor: f64,
    /// The Lipschitz-norm product `K` used by the envelope.
    pub norm_product: f64,
    pub outcome: DecayOutcome,
}

/// Upper bound for `||g||_Lip = Lip(g) + sup|g|` of a scalar observation.
fn lip_norm(obs: &Observation) -> f64 {
    let sup = match obs.value_metric() {
        ValueMetric::Line => 0.5,  // torus distances never exceed 1/2
        ValueMetric::Torus => 1.0, // values live in [0, 1)
    };
    obs.lipschitz() + sup
}

/// Measure `cov(psi, phi o T^lag)` over `m` stationary starts and fit the
/// decay envelope `a^{n^alpha}` on the lags above the noise floor.
///
/// Deterministic given `(seed, m, lags)`.
pub fn correlation_decay(
    system: &MapSystem,
    psi: &Observation,
    phi: &Observation,
    lags: &[u64],
    m: usize,
    seed: u64,
) -> Result<DecayFit, DomainError> {
    if lags.is_empty() || m == 0 {
        return Err(DomainError::EmptyCount);
    }
    if psi.codomain_dim(system.dim)? != 1 || phi.codomain_dim(system.dim)? != 1 {
        return Err(DomainError::DimensionMismatch {
            expected: 1,
            got: system.dim,
        });
    }
    let mut lags = lags.to_vec();
    lags.sort_unstable();
    lags.dedup();
    let max_lag = *lags.last().unwrap();

    // accumulate sums for each lag in one streaming pass per start
    let mut sum_a = 0.0f64;
    let mut sum_b = vec![0.0f64; lags.len()];
    let mut sum_ab = vec![0.0f64; lags.len()];
    let mut state = Vec::new();
    let mut value = Vec::new();
    for j in 0..m {
        let mut orbit = system.sample_orbit(substream(seed, j as u64));
        state.resize(system.dim, 0.0);
        orbit.write_state(&mut state);
        psi.apply(&state, &mut value);
        let a = value[0];
        sum_a += a;
        let mut next = 0usize;
        for i in 0..=max_lag {
            if next < lags.len() && lags[next] == i {
                orbit.write_state(&mut state);
                phi.apply(&state, &mut value);
                let b = value[0];
                sum_b[next] += b;
                sum_ab[next] += a * b;
                next += 1;
            }
            if i < max_lag {
                orbit.advance();
            }
        }
    }
    let mf = m as f64;
    let covariances: Vec<f64> = (0..lags.len())
        .map(|k| (sum_ab[k] / mf - (sum_a / mf) * (sum_b[k] / mf)).abs())
        .collect();

    let noise_floor = 3.0 / mf.sqrt();
    let norm_product = lip_norm(psi) * lip_norm(phi);
    let outcome = fit_envelope(&lags, &covariances, noise_floor, norm_product);

    Ok(DecayFit {
        lags,
        covariances,
        noise_floor,
        norm_product,
        outcome,
    })
}

/// Least-squares fit of `log|cov| = log K + n^alpha log a` over the resolved
/// lags: a 1-d scan over `alpha` with the optimal `log a` in closed form.
fn fit_envelope(lags: &[u64], covariances: &[f64], noise_floor: f64, k: f64) -> DecayOutcome {
    let resolved: Vec<(f64, f64)> = lags
        .iter()
        .zip(covariances.iter())
        .filter(|(&lag, &cov)| lag >= 1 && cov > noise_floor)
        .map(|(&lag, &cov)| (lag as f64, cov.ln() - k.ln()))
        .collect();
    if resolved.is_empty() {
        return DecayOutcome::IndistinguishableFromZero;
    }

    let objective = |alpha: f64| -> (f64, f64) {
        // optimal log a for this alpha (clamped negative so a < 1)
        let mut zz = 0.0;
        let mut zy = 0.0;
        for &(n, y) in &resolved {
            let z = n.powf(alpha);
            zz += z * z;
            zy += z * y;
        }
        let log_a = (zy / zz).min(-1e-12);
        let sse: f64 = resolved
            .iter()
            .map(|&(n, y)| {
                let e = y - n.powf(alpha) * log_a;
                e * e
            })
            .sum();
        (sse, log_a)
    };

    let mut best = (f64::INFINITY, 1.0, -1.0);
    let mut alpha = 0.05f64;
    while alpha <= 2.0 {
        let (sse, log_a) = objective(alpha);
        if sse < best.0 {
            best = (sse, alpha, log_a);
        }
        alpha += 0.0125;
    }
    // local refinement around the best grid point
    let mut lo = (best.1 - 0.0125).max(0.01);
    let mut hi = best.1 + 0.0125;
    for _ in 0..40 {
        let mid1 = lo + (hi - lo) / 3.0;
        let mid2 = hi - (hi - lo) / 3.0;
        if objective(mid1).0 <= objective(mid2).0 {
            hi = mid2;
        } else {
            lo = mid1;
        }
    }
    let alpha = (lo + hi) / 2.0;
    let (sse, log_a) = objective(alpha);
    let a = log_a.exp();

    let mut violations = 0usize;
    for (&lag, &cov) in lags.iter().zip(covariances.iter()) {
        if lag >= 1 && cov > k * (lag as f64).powf(alpha).mul_add(log_a, 0.0).exp() {
            violations += 1;
        }
    }
    DecayOutcome::Fitted {
        a,
        alpha,
        residual: (sse / resolved.len() as f64).sqrt(),
        envelope_holds: violations == 0,
        envelope_violations: violations,
    }
}

/// One annulus measurement: empirical mass of
/// `B(y, r + rho) \ B(y, r - rho)` averaged over centers, against the
/// hypothesized bound `r^-xi rho^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusEntry {
    pub r: f64,
    pub rho: f64,
    pub mass: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Annulus masses over a `(r, rho)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnuliReport {
    pub xi: f64,
    pub beta: f64,
    pub entries: Vec<AnnulusEntry>,
    /// `max mass / bound` over the grid; at most 1 is consistent with the
    /// hypothesis at these scales.
    pub max_violation_ratio: f64,
}

/// Estimate annulus masses of the sample measure at every `(r, rho)` pair of
/// the two grids. Requires `rho < r` for every pair, `xi >= 0`, `beta >= 1`.
pub fn annuli_regularity(
    samples: &[Vec<f64>],
    centers: &[Vec<f64>],
    r_grid: &[f64],
    rho_grid: &[f64],
    xi: f64,
    beta: f64,
    metric: ValueMetric,
) -> Result<AnnuliReport, DomainError> {
    if samples.is_empty() || centers.is_empty() {
        return Err(DomainError::EmptyCloud);
    }
    if r_grid.is_empty() || rho_grid.is_empty() {
        return Err(DomainError::EmptyCount);
    }
    if xi < 0.0 || beta < 1.0 {
        return Err(DomainError::NonPositiveRadius(xi.min(beta - 1.0)));
    }
    for &r in r_grid {
        for &rho in rho_grid {
            if rho >= r {
                return Err(DomainError::AnnulusWiderThanRadius { r, rho });
            }
            if rho <= 0.0 {
                return Err(DomainError::NonPositiveRadius(rho));
            }
        }
    }

    let cloud = PreparedCloud::new(samples, metric)?;
    let denom = samples.len() as f64 * centers.len() as f64;
    let mut entries = Vec::with_capacity(r_grid.len() * rho_grid.len());
    let mut max_ratio = 0.0f64;
    for &r in r_grid {
        for &rho in rho_grid {
            let outer = cloud.count_within(centers, r + rho)?;
            let inner = cloud.count_within(centers, r - rho)?;
            let mass = (outer - inner) as f64 / denom;
            let bound = r.powf(-xi) * rho.powf(beta);
            let ratio = mass / bound;
            max_ratio = max_ratio.max(ratio);
            entries.push(AnnulusEntry {
                r,
                rho,
                mass,
                bound,
                ratio,
            });
        }
    }
    Ok(AnnuliReport {
        xi,
        beta,
        entries,
        max_violation_ratio: max_ratio,
    })
}

/// Convenience sampler shared by the CLI diagnose paths: observed samples of
/// a system's invariant measure.
pub fn observed_samples(
    system: &MapSystem,
    obs: &Observation,
    count: usize,
    rng: &mut Substream,
) -> Result<Vec<Vec<f64>>, DomainError> {
    obs.codomain_dim(system.dim)?;
    let mut out = Vec::with_capacity(count);
    let mut value = Vec::new();
    for _ in 0..count {
        let x = system.sample_point(rng);
        obs.apply(&x, &mut value);
        out.push(value.clone());
    }
    Ok(out)
}
