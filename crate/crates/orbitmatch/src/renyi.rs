//! Symmetric Rényi divergence estimation from sample clouds.
//!
//! The divergence of two measures is the small-`r` scaling exponent of the
//! cross-correlation integral `C(r) = ∫ mu(B(x, r)) d eta(x)`. Its
//! Monte-Carlo counterpart is the fraction of cross pairs within distance
//! `r`, evaluated over a geometric radius schedule and fitted by ordinary
//! least squares in log-log coordinates.
//!
//! Counts use strict inequality `d < r` (open balls; ties on the distance
//! lattice are deterministic). [`brute_force_count`] is the definitional
//! double loop; [`accelerated_count`] produces identical integers via sorted
//! lattice queries (1-d torus), a sorted sweep (1-d line), or a cell grid
//! (d-dim torus).

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DomainError, EstimateError};
use crate::metric::{lattice_coord, ValueMetric, LATTICE_SIZE};

/// Geometrically decreasing radii `r_k = r_max * ratio^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiiSchedule {
    pub r_max: f64,
    pub count: usize,
    pub ratio: f64,
}

impl RadiiSchedule {
    pub fn new(r_max: f64, count: usize, ratio: f64) -> Result<Self, DomainError> {
        if !(r_max > 0.0 && r_max <= 0.5) {
            return Err(DomainError::NonPositiveRadius(r_max));
        }
        if count == 0 {
            return Err(DomainError::EmptyCount);
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(DomainError::NonPositiveRadius(ratio));
        }
        Ok(RadiiSchedule {
            r_max,
            count,
            ratio,
        })
    }

    /// The default halving schedule.
    pub fn halving(r_max: f64, count: usize) -> Result<Self, DomainError> {
        Self::new(r_max, count, 0.5)
    }

    pub fn radii(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count);
        let mut r = self.r_max;
        for _ in 0..self.count {
            out.push(r);
            r *= self.ratio;
        }
        out
    }
}

/// Cross-correlation values over a radius schedule, with raw pair counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    /// Strictly decreasing radii.
    pub radii: Vec<f64>,
    /// `values[k] = pair_counts[k] / (M * N)`, nonincreasing in `k`.
    pub values: Vec<f64>,
    pub pair_counts: Vec<u64>,
    /// `(M, N) = (|U|, |V|)`.
    pub sample_sizes: (usize, usize),
}

/// Log-log slope fit of a correlation estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceFit {
    /// The divergence estimate: slope of `log C(r)` against `log r`.
    pub slope: f64,
    pub intercept: f64,
    /// Index range of the schedule the fit was allowed to use.
    pub fit_window: (usize, usize),
    pub r_squared: f64,
    /// Indices inside the window excluded from the regression.
    pub dropped_radii: Vec<usize>,
}

fn validate_clouds(u: &[Vec<f64>], v: &[Vec<f64>]) -> Result<usize, DomainError> {
    let dim = match (u.first(), v.first()) {
        (Some(a), Some(b)) => {
            if a.len() != b.len() {
                return Err(DomainError::DimensionMismatch {
                    expected: a.len(),
                    got: b.len(),
                });
            }
            a.len()
        }
        _ => return Err(DomainError::EmptyCloud),
    };
    for p in u.iter().chain(v.iter()) {
        if p.len() != dim {
            return Err(DomainError::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    Ok(dim)
}

/// The definitional count: a double loop over all cross pairs with the exact
/// distance predicate. Reference semantics for [`accelerated_count`].
pub fn brute_force_count(
    u: &[Vec<f64>],
    v: &[Vec<f64>],
    r: f64,
    metric: ValueMetric,
) -> Result<u64, DomainError> {
    validate_clouds(u, v)?;
    if r <= 0.0 {
        return Err(DomainError::NonPositiveRadius(r));
    }
    let mut count = 0u64;
    for a in u {
        for b in v {
            if metric.distance(a, b) < r {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// A sample cloud preprocessed for repeated fixed-radius counting queries.
#[derive(Debug, Clone)]
pub struct PreparedCloud {
    metric: ValueMetric,
    dim: usize,
    len: usize,
    repr: CloudRepr,
}

#[derive(Debug, Clone)]
enum CloudRepr {
    /// 1-d torus values as sorted lattice indices.
    TorusLine(Vec<u64>),
    /// 1-d real values, sorted.
    RealLine(Vec<f64>),
    /// Higher-dimensional points, counted per query against a cell grid.
    Points(Vec<Vec<f64>>),
}

impl PreparedCloud {
    pub fn new(points: &[Vec<f64>], metric: ValueMetric) -> Result<Self, DomainError> {
        if points.is_empty() {
            return Err(DomainError::EmptyCloud);
        }
        let dim = points[0].len();
        for p in points {
            if p.len() != dim {
                return Err(DomainError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        let repr = match (metric, dim) {
            (ValueMetric::Torus, 1) => {
                crate::metric::validate_point(&points.iter().map(|p| p[0]).collect::<Vec<_>>())?;
                let mut q: Vec<u64> = points.iter().map(|p| lattice_coord(p[0])).collect();
                q.sort_unstable();
                CloudRepr::TorusLine(q)
            }
            (ValueMetric::Line, 1) => {
                let mut s: Vec<f64> = points.iter().map(|p| p[0]).collect();
                s.sort_unstable_by(f64::total_cmp);
                CloudRepr::RealLine(s)
            }
            _ => CloudRepr::Points(points.to_vec()),
        };
        Ok(PreparedCloud {
            metric,
            dim,
            len: points.len(),
            repr,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of cloud points within open distance `r` of `query`, summed
    /// over all query points. Exactly equals the brute-force double loop.
    pub fn count_within(&self, queries: &[Vec<f64>], r: f64) -> Result<u64, DomainError> {
        if queries.is_empty() {
            return Err(DomainError::EmptyCloud);
        }
        if r <= 0.0 {
            return Err(DomainError::NonPositiveRadius(r));
        }
        for q in queries {
            if q.len() != self.dim {
                return Err(DomainError::DimensionMismatch {
                    expected: self.dim,
                    got: q.len(),
                });
            }
        }
        Ok(match &self.repr {
            CloudRepr::TorusLine(sorted) => {
                // d(u, v) < r on the lattice means gap <= reach in integers,
                // so each query is two exact binary searches
                let reach = lattice_reach(r);
                queries
                    .par_iter()
                    .map(|q| count_torus_arc(sorted, lattice_coord(q[0]), reach))
                    .sum()
            }
            CloudRepr::RealLine(sorted) => queries
                .par_iter()
                .map(|q| count_line_walk(sorted, q[0], r))
                .sum(),
            CloudRepr::Points(points) => {
                if self.metric == ValueMetric::Torus {
                    count_torus_grid(points, queries, r)
                } else {
                    // no built-in produces multi-dimensional line-metric
                    // values; keep the definitional loop for completeness
                    let mut count = 0u64;
                    for q in queries {
                        for p in points {
                            if self.metric.distance(q, p) < r {
                                count += 1;
                            }
                        }
                    }
                    count
                }
            }
        })
    }
}

/// Largest integer gap strictly below `r * 2^53`, i.e. `d < r` on the lattice
/// is `gap <= reach`. `None` means every gap qualifies.
fn lattice_reach(r: f64) -> Option<u64> {
    let t = r * LATTICE_SIZE as f64; // exact scaling by a power of two
    if t > (LATTICE_SIZE / 2) as f64 {
        return None; // r exceeds the circle diameter: all pairs count
    }
    let reach = if t.fract() == 0.0 { t as u64 - 1 } else { t as u64 };
    Some(reach)
}

/// Count sorted lattice values in the closed circular arc
/// `[center - reach, center + reach]`.
fn count_torus_arc(sorted: &[u64], center: u64, reach: Option<u64>) -> u64 {
    let reach = match reach {
        None => return sorted.len() as u64,
        Some(g) => g,
    };
    if 2 * reach + 1 >= LATTICE_SIZE {
        return sorted.len() as u64;
    }
    let lo = (center + LATTICE_SIZE - reach) % LATTICE_SIZE;
    let hi = (center + reach) % LATTICE_SIZE;
    let below = |bound: u64| sorted.partition_point(|&q| q < bound) as u64;
    if lo <= hi {
        // plain interval [lo, hi]
        below(hi + 1) - below(lo)
    } else {
        // wrapped interval [lo, M) plus [0, hi]
        (sorted.len() as u64 - below(lo)) + below(hi + 1)
    }
}

/// Count sorted real values within open distance `r` of `center` by walking
/// outward from the insertion point with the exact predicate.
fn count_line_walk(sorted: &[f64], center: f64, r: f64) -> u64 {
    let start = sorted.partition_point(|&v| v < center);
    let mut count = 0u64;
    let mut i = start;
    while i < sorted.len() && (sorted[i] - center).abs() < r {
        count += 1;
        i += 1;
    }
    let mut j = start;
    while j > 0 && (sorted[j - 1] - center).abs() < r {
        count += 1;
        j -= 1;
    }
    count
}

/// Cell-list count on the d-dimensional torus: cells of width `>= r`, so a
/// Chebyshev ball only touches the 3^d neighborhood; candidates re-checked
/// with the exact predicate.
fn count_torus_grid(points: &[Vec<f64>], queries: &[Vec<f64>], r: f64) -> u64 {
    let dim = points[0].len();
    // keep the total cell count bounded regardless of dimension
    let per_axis_cap = ((1u64 << 20) as f64).powf(1.0 / dim as f64) as usize;
    let cells_per_axis = ((1.0 / r).floor() as usize).clamp(1, per_axis_cap.max(1));
    let cell_of = |p: &[f64]| -> usize {
        let mut idx = 0usize;
        for &c in p {
            let k = ((c * cells_per_axis as f64) as usize).min(cells_per_axis - 1);
            idx = idx * cells_per_axis + k;
        }
        idx
    };
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); cells_per_axis.pow(dim as u32)];
    for (i, p) in points.iter().enumerate() {
        cells[cell_of(p)].push(i);
    }

    let offsets: Vec<Vec<i64>> = {
        // cartesian product of {-1, 0, 1}^dim
        let mut acc: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..dim {
            let mut next = Vec::new();
            for prefix in &acc {
                for d in [-1i64, 0, 1] {
                    let mut v = prefix.clone();
                    v.push(d);
                    next.push(v);
                }
            }
            acc = next;
        }
        acc
    };

    queries
        .par_iter()
        .map(|q| {
            let mut coords = vec![0i64; dim];
            for (k, &c) in q.iter().enumerate() {
                coords[k] = ((c * cells_per_axis as f64) as i64).min(cells_per_axis as i64 - 1);
            }
            // wrapped neighbor offsets can alias when an axis has fewer than
            // three cells, so deduplicate the neighborhood first
            let mut neighborhood: Vec<usize> = offsets
                .iter()
                .map(|off| {
                    let mut idx = 0usize;
                    for k in 0..dim {
                        let c = (coords[k] + off[k]).rem_euclid(cells_per_axis as i64) as usize;
                        idx = idx * cells_per_axis + c;
                    }
                    idx
                })
                .collect();
            neighborhood.sort_unstable();
            neighborhood.dedup();
            let mut count = 0u64;
            for idx in neighborhood {
                for &pi in &cells[idx] {
                    if ValueMetric::Torus.distance(q, &points[pi]) < r {
                        count += 1;
                    }
                }
            }
            count
        })
        .sum()
}

/// Identical to [`brute_force_count`], via the preprocessed fast paths.
pub fn accelerated_count(
    u: &[Vec<f64>],
    v: &[Vec<f64>],
    r: f64,
    metric: ValueMetric,
) -> Result<u64, DomainError> {
    validate_clouds(u, v)?;
    PreparedCloud::new(v, metric)?.count_within(u, r)
}

/// Monte-Carlo cross-correlation integral: the fraction of cross pairs
/// closer than `r`. Symmetric in `(u, v)`.
pub fn cross_correlation_integral(
    u: &[Vec<f64>],
    v: &[Vec<f64>],
    r: f64,
    metric: ValueMetric,
) -> Result<f64, DomainError> {
    let count = accelerated_count(u, v, r, metric)?;
    Ok(count as f64 / (u.len() as f64 * v.len() as f64))
}

/// The cross-correlation integral over a whole radius schedule.
pub fn cross_correlation_curve(
    u: &[Vec<f64>],
    v: &[Vec<f64>],
    schedule: &RadiiSchedule,
    metric: ValueMetric,
) -> Result<CorrelationEstimate, DomainError> {
    validate_clouds(u, v)?;
    let prepared = PreparedCloud::new(v, metric)?;
    let radii = schedule.radii();
    let mut pair_counts = Vec::with_capacity(radii.len());
    let mut values = Vec::with_capacity(radii.len());
    let denom = u.len() as f64 * v.len() as f64;
    for &r in &radii {
        let count = prepared.count_within(u, r)?;
        pair_counts.push(count);
        values.push(count as f64 / denom);
    }
    Ok(CorrelationEstimate {
        radii,
        values,
        pair_counts,
        sample_sizes: (u.len(), v.len()),
    })
}

/// Pair counts below this resolve the value to worse than ~14% relative
/// error; the default fit window skips them.
pub const MIN_RESOLVED_COUNT: u64 = 50;

/// Ordinary least squares of `log value` against `log radius`.
///
/// The default window drops the two largest radii (diameter saturation bends
/// the curve there) and every radius with fewer than [`MIN_RESOLVED_COUNT`]
/// pairs. An explicit window overrides the first rule; zero-count radii are
/// always dropped.
pub fn fit_divergence(
    est: &CorrelationEstimate,
    window: Option<Range<usize>>,
) -> Result<DivergenceFit, EstimateError> {
    let k = est.radii.len();
    let (range, min_count) = match window {
        Some(w) => (w.start.min(k)..w.end.min(k), 1),
        None => (2.min(k)..k, MIN_RESOLVED_COUNT),
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = Vec::new();
    for i in range.clone() {
        if est.pair_counts[i] < min_count.max(1) {
            dropped.push(i);
        } else {
            xs.push(est.radii[i].ln());
            ys.push(est.values[i].ln());
        }
    }
    if xs.len() < 2 {
        return Err(EstimateError::InsufficientResolvedScales);
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 {
        1.0 // a constant fitted by a constant: perfect
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(DivergenceFit {
        slope,
        intercept,
        fit_window: (range.start, range.end),
        r_squared,
        dropped_radii: dropped,
    })
}

/// Expected threshold count over an orbit of length `n`:
/// `E(Q_n) = n * C(r)` by invariance of both measures.
pub fn expected_counting(
    u: &[Vec<f64>],
    v: &[Vec<f64>],
    r: f64,
    n: u64,
    metric: ValueMetric,
) -> Result<f64, DomainError> {
    Ok(n as f64 * cross_correlation_integral(u, v, r, metric)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, uniform_point};
    use rand::Rng;

    fn cloud(points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&p| vec![p]).collect()
    }

    fn uniform_cloud(seed: u64, stream: u64, m: usize) -> Vec<Vec<f64>> {
        let mut rng = substream(seed, stream);
        (0..m).map(|_| uniform_point(&mut rng, 1)).collect()
    }

    #[test]
    fn integral_of_the_tiny_example() {
        // U = {0.0, 0.5}, V = {0.1}, r = 0.2: only d(0.0, 0.1) = 0.1 < 0.2
        let c = cross_correlation_integral(
            &cloud(&[0.0, 0.5]),
            &cloud(&[0.1]),
            0.2,
            ValueMetric::Torus,
        )
        .unwrap();
        assert_eq!(c, 0.5);
    }

    #[test]
    fn integral_saturates_beyond_the_diameter() {
        let u = uniform_cloud(1, 0, 50);
        let v = uniform_cloud(1, 1, 70);
        let c = cross_correlation_integral(&u, &v, 0.51, ValueMetric::Torus).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn single_coincident_pair_counts_fully() {
        let u = cloud(&[0.3]);
        let c = cross_correlation_integral(&u, &u, 0.1, ValueMetric::Torus).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn empty_cloud_is_a_domain_error() {
        assert!(matches!(
            cross_correlation_integral(&[], &cloud(&[0.1]), 0.2, ValueMetric::Torus),
            Err(DomainError::EmptyCloud)
        ));
    }

    #[test]
    fn count_is_symmetric_in_the_clouds() {
        let u = uniform_cloud(2, 0, 120);
        let v = uniform_cloud(2, 1, 80);
        for r in [0.01, 0.1, 0.26, 0.5] {
            let a = accelerated_count(&u, &v, r, ValueMetric::Torus).unwrap();
            let b = accelerated_count(&v, &u, r, ValueMetric::Torus).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn accelerated_count_equals_brute_force_on_random_instances() {
        let mut rng = substream(404, 0);
        for case in 0..500 {
            let m = 1 + rng.random_range(0..200usize);
            let n = 1 + rng.random_range(0..200usize);
            let r: f64 = 0.5 * rng.random::<f64>();
            if r == 0.0 {
                continue;
            }
            let metric = if case % 3 == 0 {
                ValueMetric::Line
            } else {
                ValueMetric::Torus
            };
            let u: Vec<Vec<f64>> = (0..m).map(|_| uniform_point(&mut rng, 1)).collect();
            let v: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(&mut rng, 1)).collect();
            let fast = accelerated_count(&u, &v, r, metric).unwrap();
            let slow = brute_force_count(&u, &v, r, metric).unwrap();
            assert_eq!(fast, slow, "case {case} metric {metric:?} r {r}");
        }
    }

    #[test]
    fn accelerated_count_equals_brute_force_in_two_dimensions() {
        let mut rng = substream(405, 0);
        for _ in 0..60 {
            let m = 1 + rng.random_range(0..120usize);
            let n = 1 + rng.random_range(0..120usize);
            let r: f64 = 0.4 * rng.random::<f64>() + 0.01;
            let u: Vec<Vec<f64>> = (0..m).map(|_| uniform_point(&mut rng, 2)).collect();
            let v: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(&mut rng, 2)).collect();
            let fast = accelerated_count(&u, &v, r, ValueMetric::Torus).unwrap();
            let slow = brute_force_count(&u, &v, r, ValueMetric::Torus).unwrap();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn strict_inequality_empties_zero_radius_neighborhoods() {
        // identical sorted clouds at r just above 0: d = 0 < r counts,
        // but exact antipodes at r = 0.5 do not
        let u = cloud(&[0.0, 0.25]);
        let v = cloud(&[0.5, 0.75]);
        let c = accelerated_count(&u, &v, 0.5, ValueMetric::Torus).unwrap();
        // pairs: (0,0.5) antipodal excluded, (0,0.75) d=0.25, (0.25,0.5) d=0.25,
        // (0.25,0.75) antipodal excluded
        assert_eq!(c, 2);
    }

    #[test]
    fn curve_values_are_monotone_in_the_radius() {
        let u = uniform_cloud(3, 0, 400);
        let v = uniform_cloud(3, 1, 400);
        let schedule = RadiiSchedule::halving(0.5, 8).unwrap();
        let est = cross_correlation_curve(&u, &v, &schedule, ValueMetric::Torus).unwrap();
        for w in est.values.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for w in est.radii.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert_eq!(est.sample_sizes, (400, 400));
    }

    #[test]
    fn single_radius_schedule_gives_a_single_entry() {
        let u = uniform_cloud(4, 0, 10);
        let schedule = RadiiSchedule::halving(0.25, 1).unwrap();
        let est = cross_correlation_curve(&u, &u, &schedule, ValueMetric::Torus).unwrap();
        assert_eq!(est.values.len(), 1);
    }

    #[test]
    fn circle_lebesgue_law_at_monte_carlo_scale() {
        // C(r) ~ 2r for independent uniform clouds on the circle
        let u = uniform_cloud(5, 0, 10_000);
        let v = uniform_cloud(5, 1, 10_000);
        let schedule = RadiiSchedule::halving(0.25, 3).unwrap();
        let est = cross_correlation_curve(&u, &v, &schedule, ValueMetric::Torus).unwrap();
        for (&r, &value) in est.radii.iter().zip(est.values.iter()) {
            let tol = 3.0 * (0.5f64 / 10_000.0).sqrt();
            assert!((value - 2.0 * r).abs() <= tol, "r={r} value={value}");
        }
    }

    #[test]
    fn pushforward_under_identity_changes_nothing() {
        let u = uniform_cloud(6, 0, 200);
        let v = uniform_cloud(6, 1, 200);
        let obs = crate::systems::Observation::identity();
        let observed = |cloud: &[Vec<f64>]| -> Vec<Vec<f64>> {
            let mut buf = Vec::new();
            cloud
                .iter()
                .map(|p| {
                    obs.apply(p, &mut buf);
                    buf.clone()
                })
                .collect()
        };
        let (fu, fv) = (observed(&u), observed(&v));
        let schedule = RadiiSchedule::halving(0.25, 5).unwrap();
        let a = cross_correlation_curve(&u, &v, &schedule, ValueMetric::Torus).unwrap();
        let b = cross_correlation_curve(&fu, &fv, &schedule, ValueMetric::Torus).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_power_law_fits_with_unit_r_squared() {
        let est = CorrelationEstimate {
            radii: vec![0.25, 0.125, 0.0625],
            values: vec![0.5, 0.25, 0.125],
            pair_counts: vec![500, 250, 125],
            sample_sizes: (100, 10),
        };
        let fit = fit_divergence(&est, Some(0..3)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.dropped_radii.is_empty());

        let est2 = CorrelationEstimate {
            radii: vec![0.25, 0.125],
            values: vec![0.0625, 0.015625],
            pair_counts: vec![625, 156],
            sample_sizes: (100, 100),
        };
        let fit2 = fit_divergence(&est2, Some(0..2)).unwrap();
        assert!((fit2.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_counts_are_an_estimation_error() {
        let est = CorrelationEstimate {
            radii: vec![0.25, 0.125, 0.0625],
            values: vec![0.0, 0.0, 0.0],
            pair_counts: vec![0, 0, 0],
            sample_sizes: (10, 10),
        };
        assert!(matches!(
            fit_divergence(&est, Some(0..3)),
            Err(EstimateError::InsufficientResolvedScales)
        ));
    }

    #[test]
    fn default_window_drops_the_two_largest_radii_and_thin_counts() {
        let est = CorrelationEstimate {
            radii: vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
            values: vec![0.9, 0.5, 0.25, 0.125, 0.000004],
            pair_counts: vec![900_000, 500_000, 250_000, 125_000, 4],
            sample_sizes: (1000, 1000),
        };
        let fit = fit_divergence(&est, None).unwrap();
        assert_eq!(fit.fit_window, (2, 5));
        assert_eq!(fit.dropped_radii, vec![4]);
        assert!((fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expected_counting_is_n_times_the_integral() {
        let u = cloud(&[0.0, 0.5]);
        let v = cloud(&[0.1]);
        let e = expected_counting(&u, &v, 0.2, 10, ValueMetric::Torus).unwrap();
        assert_eq!(e, 5.0);
        let e1 = expected_counting(&u, &v, 0.2, 1, ValueMetric::Torus).unwrap();
        assert_eq!(e1, 0.5);
    }
}
