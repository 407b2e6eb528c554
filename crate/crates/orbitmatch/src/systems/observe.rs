//! Lipschitz observations of torus states.
//!
//! An observation maps a state in `[0, 1)^dim` to a value whose distances the
//! shortest-distance machinery measures. Torus-valued observations (identity,
//! coordinate projection, integer affine) keep the circle metric; the
//! distance-to-point observation produces a real value compared with plain
//! absolute difference.
//!
//! Affine scales are restricted to nonzero integers: `x -> a*x + b mod 1` is
//! only continuous on the circle — and only `|a|`-Lipschitz — when `a` is an
//! integer. A non-integer scale tears the circle at the wrap point.

use crate::error::{ConfigError, DomainError};
use crate::metric::{lattice_coord, lattice_value, torus_distance_unchecked, ValueMetric, LATTICE_SIZE};

#[derive(Debug, Clone, PartialEq)]
enum ObsRule {
    Identity,
    Project(usize),
    Affine { scale: i64, offset_lattice: u64 },
    DistanceTo(Vec<f64>),
}

/// A named Lipschitz observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub id: String,
    rule: ObsRule,
}

impl Observation {
    pub fn identity() -> Self {
        Observation {
            id: "identity".into(),
            rule: ObsRule::Identity,
        }
    }

    /// Projection onto coordinate `k` (0-based).
    pub fn project(k: usize) -> Self {
        Observation {
            id: format!("proj:{k}"),
            rule: ObsRule::Project(k),
        }
    }

    /// `x -> scale * x + offset mod 1` per coordinate. The scale must be a
    /// nonzero integer; the offset is reduced mod 1.
    pub fn affine(scale: f64, offset: f64) -> Result<Self, DomainError> {
        if scale == 0.0 || scale.fract() != 0.0 || scale.abs() > 2f64.powi(40) {
            return Err(DomainError::NonIntegerAffineScale(scale));
        }
        let offset_lattice = lattice_coord(offset.rem_euclid(1.0).min(1.0 - f64::EPSILON));
        Ok(Observation {
            id: format!("affine:{scale}:{offset}"),
            rule: ObsRule::Affine {
                scale: scale as i64,
                offset_lattice,
            },
        })
    }

    /// Torus distance to a fixed point `p` (scalar-valued, 1-Lipschitz).
    pub fn distance_to(p: Vec<f64>) -> Result<Self, DomainError> {
        crate::metric::validate_point(&p)?;
        let id = format!(
            "dist:{}",
            p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        );
        Ok(Observation {
            id,
            rule: ObsRule::DistanceTo(p),
        })
    }

    /// Parse a CLI observation id: `identity`, `proj:K`, `affine:A:B`,
    /// `dist:P1[,P2,...]`.
    pub fn parse(id: &str) -> Result<Self, ConfigError> {
        let unknown = || ConfigError::UnknownObservation(id.to_string());
        if id == "identity" {
            return Ok(Self::identity());
        }
        if let Some(rest) = id.strip_prefix("proj:") {
            let k: usize = rest.parse().map_err(|_| unknown())?;
            return Ok(Self::project(k));
        }
        if let Some(rest) = id.strip_prefix("affine:") {
            let (a, b) = rest.split_once(':').ok_or_else(unknown)?;
            let a: f64 = a.parse().map_err(|_| unknown())?;
            let b: f64 = b.parse().map_err(|_| unknown())?;
            return Self::affine(a, b).map_err(|e| ConfigError::invalid("observation", e.to_string()));
        }
        if let Some(rest) = id.strip_prefix("dist:") {
            let p: Result<Vec<f64>, _> = rest.split(',').map(str::parse::<f64>).collect();
            let p = p.map_err(|_| unknown())?;
            return Self::distance_to(p).map_err(|e| ConfigError::invalid("observation", e.to_string()));
        }
        Err(unknown())
    }

    /// Output dimension for states of dimension `input_dim`.
    pub fn codomain_dim(&self, input_dim: usize) -> Result<usize, DomainError> {
        match &self.rule {
            ObsRule::Identity | ObsRule::Affine { .. } => Ok(input_dim),
            ObsRule::Project(k) => {
                if *k < input_dim {
                    Ok(1)
                } else {
                    Err(DomainError::DimensionMismatch {
                        expected: input_dim,
                        got: *k + 1,
                    })
                }
            }
            ObsRule::DistanceTo(p) => {
                if p.len() == input_dim {
                    Ok(1)
                } else {
                    Err(DomainError::DimensionMismatch {
                        expected: input_dim,
                        got: p.len(),
                    })
                }
            }
        }
    }

    /// The Lipschitz constant with respect to the Chebyshev torus metric.
    pub fn lipschitz(&self) -> f64 {
        match &self.rule {
            ObsRule::Identity | ObsRule::Project(_) | ObsRule::DistanceTo(_) => 1.0,
            ObsRule::Affine { scale, .. } => scale.unsigned_abs() as f64,
        }
    }

    /// How distances between observed values are measured.
    pub fn value_metric(&self) -> ValueMetric {
        match &self.rule {
            ObsRule::DistanceTo(_) => ValueMetric::Line,
            _ => ValueMetric::Torus,
        }
    }

    /// Apply the observation, writing the observed value into `out`.
    #[inline]
    pub fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match &self.rule {
            ObsRule::Identity => out.extend_from_slice(x),
            ObsRule::Project(k) => out.push(x[*k]),
            ObsRule::Affine {
                scale,
                offset_lattice,
            } => {
                for &c in x {
                    let q = lattice_coord(c) as i128 * *scale as i128 + *offset_lattice as i128;
                    let q = q.rem_euclid(LATTICE_SIZE as i128) as u64;
                    out.push(lattice_value(q));
                }
            }
            ObsRule::DistanceTo(p) => out.push(torus_distance_unchecked(x, p)),
        }
    }
}
