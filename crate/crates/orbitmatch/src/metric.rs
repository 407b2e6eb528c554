//! Torus and line metrics evaluated on a dyadic lattice.
//!
//! Coordinates are snapped to the lattice `{k / 2^53 : 0 <= k < 2^53}` before
//! distances are taken, and all comparisons happen on integers. The returned
//! `f64` values (`k * 2^-53` with `k <= 2^52`) are exact, sums of two of them
//! are exact, and the integer circle metric satisfies symmetry and the
//! triangle inequality identically. Plain `f64` evaluation of
//! `min(|x-y|, 1-|x-y|)` does not: collinear triples round into ulp-level
//! triangle violations. The snap costs at most `2^-54` per coordinate, far
//! below every distance scale this crate resolves.

use crate::error::DomainError;

/// Number of lattice points per circle: `2^53`.
pub const LATTICE_SIZE: u64 = 1 << 53;

/// Exact value of one lattice step, `2^-53`.
pub const LATTICE_STEP: f64 = 1.0 / LATTICE_SIZE as f64;

/// Snap a coordinate in `[0, 1)` to the nearest lattice index, wrapping the
/// top of the interval back to zero.
#[inline]
pub fn lattice_coord(x: f64) -> u64 {
    debug_assert!((0.0..1.0).contains(&x), "coordinate {x} outside [0,1)");
    let q = (x * LATTICE_SIZE as f64).round() as u64;
    if q == LATTICE_SIZE {
        0
    } else {
        q
    }
}

/// The exact `f64` value of a lattice distance index.
#[inline]
pub fn lattice_value(gap: u64) -> f64 {
    gap as f64 * LATTICE_STEP
}

/// Circle distance between two lattice indices, in lattice steps.
#[inline]
pub fn circle_gap(a: u64, b: u64) -> u64 {
    let d = a.abs_diff(b);
    d.min(LATTICE_SIZE - d)
}

/// Circle distance between two points of `[0, 1)`.
#[inline]
pub fn circle_dist(x: f64, y: f64) -> f64 {
    lattice_value(circle_gap(lattice_coord(x), lattice_coord(y)))
}

/// Check that every coordinate lies in `[0, 1)`.
pub fn validate_point(x: &[f64]) -> Result<(), DomainError> {
    for (index, &value) in x.iter().enumerate() {
        if !(0.0..1.0).contains(&value) {
            return Err(DomainError::PointOutOfRange { index, value });
        }
    }
    Ok(())
}

/// Chebyshev combination of per-coordinate circle distances on the torus
/// `[0, 1)^dim`. Balls in this metric are boxes, so the Lebesgue measure of a
/// ball of radius `r < 1/2` is `(2r)^dim`.
pub fn torus_distance(x: &[f64], y: &[f64]) -> Result<f64, DomainError> {
    if x.len() != y.len() {
        return Err(DomainError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    validate_point(x)?;
    validate_point(y)?;
    Ok(torus_distance_unchecked(x, y))
}

/// As [`torus_distance`], for callers that already validated their points.
#[inline]
pub fn torus_distance_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let mut max_gap = 0u64;
    for (&a, &b) in x.iter().zip(y.iter()) {
        let gap = circle_gap(lattice_coord(a), lattice_coord(b));
        max_gap = max_gap.max(gap);
    }
    lattice_value(max_gap)
}

/// How distances between observed values are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueMetric {
    /// Per-coordinate circle distance, Chebyshev-combined (torus-valued data).
    Torus,
    /// Per-coordinate absolute difference, Chebyshev-combined (real-valued data).
    Line,
}

impl ValueMetric {
    /// Distance between two observed values. Values must share a dimension;
    /// the hot paths guarantee this by construction.
    #[inline]
    pub fn distance(self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            ValueMetric::Torus => torus_distance_unchecked(u, v),
            ValueMetric::Line => {
                let mut max = 0.0f64;
                for (&a, &b) in u.iter().zip(v.iter()) {
                    max = max.max((a - b).abs());
                }
                max
            }
        }
    }

    /// Scalar fast path used by the pair counters.
    #[inline]
    pub fn distance_1d(self, u: f64, v: f64) -> f64 {
        match self {
            ValueMetric::Torus => circle_dist(u, v),
            ValueMetric::Line => (u - v).abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, uniform_point};

    fn assert_ulps(actual: f64, expected: f64, ulps: u64) {
        let a = actual.to_bits();
        let b = expected.to_bits();
        assert!(
            a.abs_diff(b) <= ulps,
            "{actual} differs from {expected} by more than {ulps} ulps"
        );
    }

    #[test]
    fn wraparound_distance() {
        // real value 0.2; the lattice result is within one ulp of it
        assert_ulps(circle_dist(0.1, 0.9), 0.2, 2);
    }

    #[test]
    fn identical_points_are_at_distance_zero() {
        assert_eq!(torus_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn antipodal_distance_is_exactly_half() {
        assert_eq!(circle_dist(0.25, 0.75), 0.5);
    }

    #[test]
    fn dimension_mismatch_is_a_domain_error() {
        assert!(matches!(
            torus_distance(&[0.1], &[0.1, 0.2]),
            Err(DomainError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_point_is_a_domain_error() {
        assert!(matches!(
            torus_distance(&[1.0], &[0.2]),
            Err(DomainError::PointOutOfRange { .. })
        ));
    }

    #[test]
    fn metric_axioms_hold_exactly_on_random_triples() {
        let mut rng = substream(20240, 0);
        for _ in 0..10_000 {
            let x = uniform_point(&mut rng, 2);
            let y = uniform_point(&mut rng, 2);
            let z = uniform_point(&mut rng, 2);
            let dxy = torus_distance_unchecked(&x, &y);
            let dyx = torus_distance_unchecked(&y, &x);
            let dxz = torus_distance_unchecked(&x, &z);
            let dyz = torus_distance_unchecked(&y, &z);
            assert_eq!(dxy, dyx);
            assert!(dxy >= 0.0);
            // lattice distances are multiples of 2^-53 not exceeding 1/2, so
            // the sum below is exact and the comparison has no rounding slack
            assert!(dxz <= dxy + dyz, "triangle violated: {dxz} > {dxy} + {dyz}");
        }
    }

    #[test]
    fn top_of_the_interval_sits_one_step_from_zero() {
        // the largest f64 below 1 maps to the last lattice point
        let just_below_one = 1.0 - f64::EPSILON / 2.0;
        assert_eq!(lattice_coord(just_below_one), LATTICE_SIZE - 1);
        assert_eq!(circle_dist(just_below_one, 0.0), LATTICE_STEP);
    }

    #[test]
    fn line_metric_is_plain_absolute_difference() {
        assert_eq!(ValueMetric::Line.distance_1d(0.1, 0.9), 0.8);
        assert_eq!(ValueMetric::Line.distance(&[0.0, 0.25], &[0.5, 0.30]), 0.5);
    }
}
