//! Cross-validating toolkit for uplink RSMA/NOMA/OMA cellular networks.
//!
//! Two independent evaluation routes are provided for the same rate metrics:
//!
//! * [`montecarlo`] runs a seeded network simulation (Poisson-distributed base
//!   stations and users, nearest-BS association, Rayleigh fading) and
//!   aggregates conditional received rate (CRR) statistics per user rank.
//! * [`analytic`] evaluates closed-form integral expressions for the same
//!   quantities: the conditional CRR on a fixed topology, its spatial average,
//!   higher moments, the Shannon-limit achievable rate, and a beta-fitted meta
//!   distribution.
//!
//! Supporting modules: [`spatial`] (point processes, association, distance
//! laws, interference-field models, K-function), [`sinr`] (instantaneous SINR
//! under rate splitting), [`mcs`] (discrete rate ladder and fading-averaged
//! CRR), and [`quadrature`] (deterministic adaptive integration).

pub mod analytic;
pub mod mcs;
pub mod montecarlo;
pub mod quadrature;
pub mod sinr;
pub mod spatial;
pub mod stats;

pub use mcs::{AccessScheme, CrrSample, McsScheme};
pub use montecarlo::{ExperimentOutput, ExperimentSpec, RateStatistics, Sweep, SweepParam};
pub use sinr::{FadingDraw, SinrPair, SystemConfig};
pub use spatial::{CellAssignment, DistanceProfile, PointSet, Window};

/// Nearest-link distance correction factor for the Rayleigh fit of the
/// in-cell link distance law.
pub const B1: f64 = 5.0 / 4.0;

/// Decay constant of the base-station/user pair correlation function.
pub const B2: f64 = 12.0 / 5.0;
