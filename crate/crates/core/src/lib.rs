//! Measurement and classification of transient (pre-period) growth in finite
//! deterministic discrete dynamical systems.
//!
//! A system is a finite configuration set together with a total update map.
//! Every trajectory eventually falls into a cycle; the number of steps before
//! it does is the transient of the starting configuration. This crate
//! estimates how the *average* transient grows as a family of systems is
//! scaled up, and assigns one of the growth classes Bounded, Log, Lin, Poly
//! or Exp (or Unclassified when no model fits well).
//!
//! The pieces:
//!
//! - [`dynamics`] — the [`System`](dynamics::System) abstraction, exact
//!   transient/period measurement via constant-memory cycle detection, and a
//!   brute-force phase-space enumeration for small systems.
//! - [`estimator`] — Monte Carlo estimation of the average transient with a
//!   batched CLT stopping rule, growth series over a size-indexed family,
//!   and a nested ensemble estimator.
//! - [`classifier`] — least-squares model fits, growth-class selection with
//!   an R² gate, and affine-rule detection for elementary CA.
//! - [`ca`], [`tm`], [`rbn`] — concrete system families: 1D/2D cellular
//!   automata, cyclic-tape Turing machines, and random Boolean networks.

pub mod ca;
pub mod classifier;
pub mod dynamics;
pub mod estimator;
pub mod rbn;
pub mod seed;
pub mod tm;

pub use classifier::{classify, fit_model, Classification, GrowthSeries, Label, ModelKind};
pub use dynamics::{
    enumerate_phase_space, exact_average_transient, measure_trajectory, Budget, EnumerableSystem,
    System, TrajectoryResult,
};
pub use estimator::{
    estimate_average_transient, estimate_ensemble_average, growth_series, EstimateSettings,
    EstimateStatus, TransientEstimate,
};
