//! # orbitmatch
//!
//! Simulation and estimation toolkit for the synchronized shortest distance
//! between observed orbits of two dynamical systems.
//!
//! Given two measure-preserving systems `(X, T, mu)` and `(X, S, eta)` and a
//! Lipschitz observation `f`, the central object is
//!
//! ```text
//! m_n(x, y) = min_{i = 0..n-1}  d( f(T^i x), f(S^i y) )
//! ```
//!
//! whose decay exponent `log m_n / (-log n)` converges, under mixing and
//! regularity assumptions, to `1/C` where `C` is the symmetric Rényi
//! divergence of the pushforward measures `f*mu` and `f*eta`. This crate
//! provides everything needed to explore that law numerically at desk scale:
//!
//! - [`systems`]: deterministic and random (skew-product) dynamical systems
//!   on the torus, with exact digit-stream arithmetic for integer-base maps
//!   so orbits never collapse to a fixed point under floating-point iteration.
//! - [`orbitdist`]: streaming computation of distance curves, record times,
//!   exponent curves, and the threshold counting function.
//! - [`renyi`]: cross-correlation integrals over radius schedules, an
//!   accelerated pair counter, and log-log slope fitting of the divergence.
//! - [`diagnostics`]: empirical checks of the decay-of-correlations and
//!   annuli-regularity hypotheses, plus the Lipschitz mollifier kernel.
//! - [`experiment`]: a config-driven Monte-Carlo harness that aggregates
//!   exponent quantiles across many sampled orbit pairs and compares them
//!   against a reference `1/C`.
//! - [`cli`]: the `orbitmatch` command-line front end (one thin binary).
//!
//! All randomness flows through counter-based substreams derived from a
//! `(seed, stream)` pair (see [`rng`]), so parallel runs are reproducible
//! independent of scheduling. Distances are evaluated on a `2^-53` lattice
//! (see [`metric`]), which makes the metric axioms hold exactly in `f64`.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod metric;
pub mod orbitdist;
pub mod renyi;
pub mod rng;
pub mod systems;

pub use error::{ConfigError, DomainError, EstimateError};
pub use orbitdist::{DistanceCurve, ExponentCurve};
pub use renyi::{CorrelationEstimate, DivergenceFit, RadiiSchedule};
pub use systems::{DigitStream, MapSystem, Observation, SkewProduct};
