//! Synchronized shortest distance between observed orbits.
//!
//! The central quantity is `m_n(x, y) = min_{i<n} d(f(T^i x), f(S^i y))` and
//! everything here is a single streaming pass over the orbit pair: running
//! prefix minima sampled on a checkpoint grid, record times where the minimum
//! strictly drops, the decay exponent `log m_n / (-log n)`, and the counting
//! function `Q_n = #{i < n : d_i < r}` (so `Q_n >= 1` exactly when `m_n < r`).
//!
//! Comparison is restricted to matching times `i`; asynchronous matching over
//! `i != j` is a different problem and out of scope.

use serde::Serialize;

use crate::error::DomainError;
use crate::systems::{MapSystem, Observation, OrbitSource, SkewProduct};

/// Distances below this floor are clamped before taking logs, so an exact
/// zero yields a large finite exponent instead of infinity. Flagged pairs are
/// reported separately by the experiment layer.
pub const EXPONENT_FLOOR: f64 = 1e-300;

/// A time at which the running minimum strictly decreased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceRecord {
    pub time: u64,
    pub distance: f64,
}

/// Prefix minima of observed distances over a checkpoint grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceCurve {
    /// Increasing orbit lengths at which the prefix minimum was sampled.
    pub checkpoints: Vec<u64>,
    /// `prefix_min[k] = min_{i < checkpoints[k]} d_i`.
    pub prefix_min: Vec<f64>,
    /// Strict-decrease times of the running minimum (ties are not records).
    pub records: Vec<DistanceRecord>,
    /// First time an exactly zero distance was seen, if any.
    pub zero_hit: Option<u64>,
}

impl DistanceCurve {
    /// The prefix minimum at the final checkpoint.
    pub fn terminal_min(&self) -> f64 {
        *self.prefix_min.last().expect("curve has at least one checkpoint")
    }
}

/// The exponent `log m_n / (-log n)` along a distance curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    /// Checkpoints with `n >= 2` (the exponent is undefined at `n = 1`).
    pub checkpoints: Vec<u64>,
    pub exponent: Vec<f64>,
    /// Where [`EXPONENT_FLOOR`] was substituted for a vanishing minimum.
    pub floor_applied: Vec<bool>,
}

impl ExponentCurve {
    pub fn terminal_exponent(&self) -> Option<f64> {
        self.exponent.last().copied()
    }
}

/// Geometric checkpoint grid `n_i = ceil(base * ratio^i)`, deduplicated,
/// clipped to `[1, n_max]`, and always ending at `n_max`. Exponent
/// convergence is logarithmic in `n`, so a geometric grid covers the curve
/// evenly in `log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointGrid {
    pub base: u64,
    pub ratio: f64,
}

impl Default for CheckpointGrid {
    fn default() -> Self {
        CheckpointGrid {
            base: 10,
            ratio: 1.5,
        }
    }
}

impl CheckpointGrid {
    pub fn new(base: u64, ratio: f64) -> Self {
        assert!(base >= 1, "checkpoint base must be at least 1");
        assert!(ratio > 1.0, "checkpoint ratio must exceed 1");
        CheckpointGrid { base, ratio }
    }

    pub fn generate(&self, n_max: u64) -> Vec<u64> {
        assert!(n_max >= 1);
        let mut points = Vec::new();
        let mut value = self.base as f64;
        while (value.ceil() as u64) < n_max {
            let n = value.ceil() as u64;
            if points.last().copied() != Some(n) {
                points.push(n);
            }
            value *= self.ratio;
        }
        points.push(n_max);
        points
    }
}

fn validate_checkpoints(checkpoints: &[u64], n: u64) -> Result<(), DomainError> {
    if checkpoints.is_empty() {
        return Err(DomainError::EmptyCount);
    }
    let mut prev = 0u64;
    for &c in checkpoints {
        if c <= prev {
            return Err(DomainError::CheckpointsNotIncreasing);
        }
        if c < 1 || c > n {
            return Err(DomainError::CheckpointOutOfRange(c));
        }
        prev = c;
    }
    Ok(())
}

/// Streaming core shared by every curve computation: one pass over `i < n`,
/// consuming the two orbit sources.
pub fn observed_curve(
    mut orbit_t: OrbitSource,
    mut orbit_s: OrbitSource,
    obs: &Observation,
    n: u64,
    checkpoints: &[u64],
) -> Result<DistanceCurve, DomainError> {
    if n == 0 {
        return Err(DomainError::EmptyCount);
    }
    validate_checkpoints(checkpoints, n)?;
    let out_dim = obs.codomain_dim(orbit_t.dim())?;
    let out_dim_s = obs.codomain_dim(orbit_s.dim())?;
    if out_dim != out_dim_s {
        return Err(DomainError::DimensionMismatch {
            expected: out_dim,
            got: out_dim_s,
        });
    }
    let metric = obs.value_metric();

    let mut x = vec![0.0; orbit_t.dim()];
    let mut y = vec![0.0; orbit_s.dim()];
    let mut fx = Vec::with_capacity(out_dim);
    let mut fy = Vec::with_capacity(out_dim);

    let mut running_min = f64::INFINITY;
    let mut records = Vec::new();
    let mut zero_hit = None;
    let mut prefix_min = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0usize;

    let last = *checkpoints.last().unwrap();
    for i in 0..last {
        orbit_t.write_state(&mut x);
        orbit_s.write_state(&mut y);
        obs.apply(&x, &mut fx);
        obs.apply(&y, &mut fy);
        let d = metric.distance(&fx, &fy);
        if d == 0.0 && zero_hit.is_none() {
            zero_hit = Some(i);
        }
        if d < running_min {
            running_min = d;
            records.push(DistanceRecord {
                time: i,
                distance: d,
            });
        }
        while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == i + 1 {
            prefix_min.push(running_min);
            next_checkpoint += 1;
        }
        orbit_t.advance();
        orbit_s.advance();
    }

    Ok(DistanceCurve {
        checkpoints: checkpoints.to_vec(),
        prefix_min,
        records,
        zero_hit,
    })
}

/// `m_n` along a checkpoint grid for two deterministic systems and explicit
/// `f64` starts.
#[allow(clippy::too_many_arguments)]
pub fn shortest_distance_curve(
    sys_t: &MapSystem,
    sys_s: &MapSystem,
    obs: &Observation,
    x: &[f64],
    y: &[f64],
    n: u64,
    checkpoints: &[u64],
) -> Result<DistanceCurve, DomainError> {
    let orbit_t = sys_t.orbit_from_f64(x)?;
    let orbit_s = sys_s.orbit_from_f64(y)?;
    observed_curve(orbit_t, orbit_s, obs, n, checkpoints)
}

/// Exponents `log(max(m_n, floor)) / (-log n)` for every checkpoint `n >= 2`.
pub fn exponent_curve(curve: &DistanceCurve) -> ExponentCurve {
    let mut checkpoints = Vec::new();
    let mut exponent = Vec::new();
    let mut floor_applied = Vec::new();
    for (&n, &m) in curve.checkpoints.iter().zip(curve.prefix_min.iter()) {
        if n < 2 {
            continue;
        }
        let floored = m < EXPONENT_FLOOR;
        let value = if floored { EXPONENT_FLOOR } else { m };
        checkpoints.push(n);
        exponent.push(value.ln() / -(n as f64).ln());
        floor_applied.push(floored);
    }
    ExponentCurve {
        checkpoints,
        exponent,
        floor_applied,
    }
}

/// Streaming count of times `i < n` with observed distance strictly below `r`.
pub fn counting_from_sources(
    mut orbit_t: OrbitSource,
    mut orbit_s: OrbitSource,
    obs: &Observation,
    r: f64,
    n: u64,
) -> Result<u64, DomainError> {
    if n == 0 {
        return Err(DomainError::EmptyCount);
    }
    if r <= 0.0 {
        return Err(DomainError::NonPositiveRadius(r));
    }
    let out_dim = obs.codomain_dim(orbit_t.dim())?;
    let out_dim_s = obs.codomain_dim(orbit_s.dim())?;
    if out_dim != out_dim_s {
        return Err(DomainError::DimensionMismatch {
            expected: out_dim,
            got: out_dim_s,
        });
    }
    let metric = obs.value_metric();
    let mut x = vec![0.0; orbit_t.dim()];
    let mut y = vec![0.0; orbit_s.dim()];
    let mut fx = Vec::with_capacity(out_dim);
    let mut fy = Vec::with_capacity(out_dim);
    let mut count = 0u64;
    for _ in 0..n {
        orbit_t.write_state(&mut x);
        orbit_s.write_state(&mut y);
        obs.apply(&x, &mut fx);
        obs.apply(&y, &mut fy);
        if metric.distance(&fx, &fy) < r {
            count += 1;
        }
        orbit_t.advance();
        orbit_s.advance();
    }
    Ok(count)
}

/// The counting function `Q_n(x, y)` for two deterministic systems.
#[allow(clippy::too_many_arguments)]
pub fn counting_function(
    sys_t: &MapSystem,
    sys_s: &MapSystem,
    obs: &Observation,
    x: &[f64],
    y: &[f64],
    r: f64,
    n: u64,
) -> Result<u64, DomainError> {
    let orbit_t = sys_t.orbit_from_f64(x)?;
    let orbit_s = sys_s.orbit_from_f64(y)?;
    counting_from_sources(orbit_t, orbit_s, obs, r, n)
}

/// Shortest distance between two random orbits: fiber states compared at
/// matching times under the ambient torus metric.
#[allow(clippy::too_many_arguments)]
pub fn rds_shortest_distance(
    sp_t: &SkewProduct,
    sp_s: &SkewProduct,
    omega_t: &[f64],
    omega_s: &[f64],
    x: &[f64],
    y: &[f64],
    n: u64,
    checkpoints: &[u64],
) -> Result<DistanceCurve, DomainError> {
    crate::metric::validate_point(omega_t)?;
    crate::metric::validate_point(omega_s)?;
    let orbit_t = sp_t.fiber_orbit_f64(omega_t, x)?;
    let orbit_s = sp_s.fiber_orbit_f64(omega_s, y)?;
    observed_curve(orbit_t, orbit_s, &Observation::identity(), n, checkpoints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, uniform_point};
    use crate::systems::parse_decimal_point;

    fn assert_ulps(actual: f64, expected: f64, ulps: u64) {
        assert!(
            actual.to_bits().abs_diff(expected.to_bits()) <= ulps,
            "{actual} differs from {expected} by more than {ulps} ulps"
        );
    }

    fn doubling_vs_tripling_example() -> DistanceCurve {
        let t = MapSystem::doubling();
        let s = MapSystem::tripling();
        let x = t.orbit_from_decimal(&parse_decimal_point("0.1").unwrap()).unwrap();
        let y = s.orbit_from_decimal(&parse_decimal_point("0.25").unwrap()).unwrap();
        observed_curve(x, y, &Observation::identity(), 3, &[1, 2, 3]).unwrap()
    }

    #[test]
    fn worked_example_distances() {
        // orbits [0.1, 0.2, 0.4] vs [0.25, 0.75, 0.25]:
        // distances 0.15, 0.45, 0.15 and m_3 = 0.15
        let curve = doubling_vs_tripling_example();
        assert_ulps(curve.prefix_min[0], 0.15, 4);
        assert_ulps(curve.prefix_min[1], 0.15, 4);
        assert_ulps(curve.terminal_min(), 0.15, 4);
        // the revisit of distance 0.15 at i = 2 ties and is not a record
        assert_eq!(curve.records.len(), 1);
        assert_eq!(curve.records[0].time, 0);
        assert_eq!(curve.zero_hit, None);
    }

    #[test]
    fn identical_starts_hit_zero_immediately() {
        let t = MapSystem::doubling();
        let curve = shortest_distance_curve(
            &t,
            &t,
            &Observation::identity(),
            &[0.37],
            &[0.37],
            10,
            &[1, 5, 10],
        )
        .unwrap();
        assert_eq!(curve.prefix_min, vec![0.0, 0.0, 0.0]);
        assert_eq!(curve.zero_hit, Some(0));
    }

    #[test]
    fn static_rotation_keeps_a_constant_distance() {
        let r = MapSystem::rotation(0.0).unwrap();
        let curve = shortest_distance_curve(
            &r,
            &r,
            &Observation::identity(),
            &[0.2],
            &[0.4],
            100,
            &[1, 10, 100],
        )
        .unwrap();
        for &m in &curve.prefix_min {
            assert_ulps(m, 0.2, 4);
        }
    }

    #[test]
    fn prefix_minimum_is_nonincreasing() {
        let t = MapSystem::doubling();
        let s = MapSystem::tripling();
        for pair_seed in 0..50 {
            let xt = t.sample_orbit(substream(33, 2 * pair_seed));
            let ys = s.sample_orbit(substream(33, 2 * pair_seed + 1));
            let grid = CheckpointGrid::default().generate(2000);
            let curve = observed_curve(xt, ys, &Observation::identity(), 2000, &grid).unwrap();
            for w in curve.prefix_min.windows(2) {
                assert!(w[1] <= w[0]);
            }
            for w in curve.records.windows(2) {
                assert!(w[1].distance < w[0].distance);
                assert!(w[1].time > w[0].time);
            }
        }
    }

    #[test]
    fn exponent_of_exact_power_laws() {
        let curve = DistanceCurve {
            checkpoints: vec![10, 100],
            prefix_min: vec![0.01, 0.01],
            records: vec![],
            zero_hit: None,
        };
        let exp = exponent_curve(&curve);
        // m = n^-2 at n = 10 gives exponent 2; m = n^-1 at n = 100 gives 1
        assert_ulps(exp.exponent[0], 2.0, 4);
        assert_ulps(exp.exponent[1], 1.0, 4);
        assert_eq!(exp.floor_applied, vec![false, false]);
    }

    #[test]
    fn exponent_floor_absorbs_zeros() {
        let curve = DistanceCurve {
            checkpoints: vec![1, 10],
            prefix_min: vec![0.5, 0.0],
            records: vec![],
            zero_hit: Some(3),
        };
        let exp = exponent_curve(&curve);
        // the n = 1 checkpoint is dropped, the zero is floored and flagged
        assert_eq!(exp.checkpoints, vec![10]);
        assert_eq!(exp.floor_applied, vec![true]);
        assert!(exp.exponent[0] > 100.0);
    }

    #[test]
    fn counting_matches_the_worked_example() {
        let t = MapSystem::doubling();
        let s = MapSystem::tripling();
        let obs = Observation::identity();
        // distances 0.15, 0.45, 0.15 against r = 0.2: two hits
        let q = counting_function(&t, &s, &obs, &[0.1], &[0.25], 0.2, 3).unwrap();
        assert_eq!(q, 2);
        // r below the minimum distance: zero hits
        assert_eq!(
            counting_function(&t, &s, &obs, &[0.1], &[0.25], 0.1, 3).unwrap(),
            0
        );
        // r beyond the torus diameter 1/2: every time counts
        assert_eq!(
            counting_function(&t, &s, &obs, &[0.1], &[0.25], 0.6, 3).unwrap(),
            3
        );
    }

    #[test]
    fn counting_and_minimum_are_dual() {
        // Q_n(r) >= 1 exactly when m_n < r, on random instances
        let t = MapSystem::doubling();
        let s = MapSystem::tripling();
        let obs = Observation::identity();
        let mut rng = substream(501, 0);
        for _ in 0..1000 {
            let x = uniform_point(&mut rng, 1);
            let y = uniform_point(&mut rng, 1);
            let r = 0.5 * rand::Rng::random::<f64>(&mut rng);
            let n = 1 + rand::Rng::random_range(&mut rng, 0..40u64);
            if r == 0.0 {
                continue;
            }
            let q = counting_function(&t, &s, &obs, &x, &y, r, n).unwrap();
            let curve = shortest_distance_curve(&t, &s, &obs, &x, &y, n, &[n]).unwrap();
            assert_eq!(q >= 1, curve.terminal_min() < r);
        }
    }

    #[test]
    fn observation_contracts_distances_at_the_unobserved_argmin() {
        // m_n under f is at most L times the distance at the time where the
        // unobserved curve attains its minimum
        let t = MapSystem::doubling();
        let s = MapSystem::tripling();
        let builtins = vec![
            Observation::identity(),
            Observation::affine(2.0, 0.125).unwrap(),
            Observation::distance_to(vec![0.0]).unwrap(),
        ];
        let mut rng = substream(502, 0);
        for _ in 0..200 {
            let x = uniform_point(&mut rng, 1);
            let y = uniform_point(&mut rng, 1);
            let n = 64;
            let plain =
                shortest_distance_curve(&t, &s, &Observation::identity(), &x, &y, n, &[n]).unwrap();
            let argmin = plain.records.last().unwrap();
            for obs in &builtins {
                let observed = shortest_distance_curve(&t, &s, obs, &x, &y, n, &[n]).unwrap();
                assert!(observed.terminal_min() <= obs.lipschitz() * argmin.distance);
            }
        }
    }

    #[test]
    fn constant_fiber_rds_reduces_to_the_deterministic_curve() {
        let sp2 = SkewProduct::doubling_pair();
        let sp3 = SkewProduct::tripling_pair();
        let rds =
            rds_shortest_distance(&sp2, &sp3, &[0.9], &[0.8], &[0.1], &[0.25], 3, &[3]).unwrap();
        assert_ulps(rds.terminal_min(), 0.15, 4);

        let det = shortest_distance_curve(
            &MapSystem::doubling(),
            &MapSystem::tripling(),
            &Observation::identity(),
            &[0.1],
            &[0.25],
            3,
            &[3],
        )
        .unwrap();
        assert_eq!(rds.prefix_min, det.prefix_min);
    }

    #[test]
    fn identical_noise_and_start_give_the_zero_curve() {
        let sp = SkewProduct::doubling_pair();
        let curve =
            rds_shortest_distance(&sp, &sp, &[0.4], &[0.4], &[0.7], &[0.7], 20, &[20]).unwrap();
        assert_eq!(curve.terminal_min(), 0.0);
        assert_eq!(curve.zero_hit, Some(0));
    }

    #[test]
    fn rds_equals_the_skew_product_curve_under_projection() {
        // the fiber route and the product-orbit route with f(omega, x) = x
        // are two computations of the same quantity and must agree exactly
        let sp2 = SkewProduct::doubling_pair();
        let sp3 = SkewProduct::tripling_pair();
        let proj = Observation::project(1);
        let grid = [1, 4, 16, 64, 100];
        let mut rng = substream(503, 0);
        for _ in 0..100 {
            let (w1, x1) = (uniform_point(&mut rng, 1), uniform_point(&mut rng, 1));
            let (w2, x2) = (uniform_point(&mut rng, 1), uniform_point(&mut rng, 1));
            let rds = rds_shortest_distance(&sp2, &sp3, &w1, &w2, &x1, &x2, 100, &grid).unwrap();
            let product = observed_curve(
                sp2.product_orbit_f64(&w1, &x1).unwrap(),
                sp3.product_orbit_f64(&w2, &x2).unwrap(),
                &proj,
                100,
                &grid,
            )
            .unwrap();
            assert_eq!(rds.prefix_min, product.prefix_min);
            assert_eq!(rds.records, product.records);
        }
    }

    #[test]
    fn checkpoint_grid_is_geometric_deduplicated_and_ends_at_n() {
        let grid = CheckpointGrid::default().generate(100);
        assert_eq!(grid.first(), Some(&10));
        assert_eq!(grid.last(), Some(&100));
        for w in grid.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(CheckpointGrid::default().generate(5), vec![5]);
        assert_eq!(CheckpointGrid::new(1, 2.0).generate(8), vec![1, 2, 4, 8]);
    }

    #[test]
    fn invalid_checkpoints_are_rejected() {
        let t = MapSystem::doubling();
        let obs = Observation::identity();
        let run = |cps: &[u64]| shortest_distance_curve(&t, &t, &obs, &[0.1], &[0.2], 10, cps);
        assert!(matches!(run(&[5, 5]), Err(DomainError::CheckpointsNotIncreasing)));
        assert!(matches!(run(&[5, 11]), Err(DomainError::CheckpointOutOfRange(11))));
        assert!(matches!(run(&[]), Err(DomainError::EmptyCount)));
    }

    #[test]
    fn mismatched_observed_dimensions_are_rejected() {
        // projecting coordinate 1 works on the 2-dim product orbit but not on
        // a 1-dim orbit
        let sp = SkewProduct::doubling_pair();
        let product = sp.product_orbit_f64(&[0.1], &[0.2]).unwrap();
        let plain = MapSystem::doubling().orbit_from_f64(&[0.3]).unwrap();
        let err = observed_curve(product, plain, &Observation::project(1), 5, &[5]);
        assert!(matches!(err, Err(DomainError::DimensionMismatch { .. })));
    }
}
