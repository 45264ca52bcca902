//! Monte Carlo estimation of the average transient length.
//!
//! Initial configurations are sampled uniformly in batches; sampling stops
//! once the 95% confidence half-width falls below a fraction `epsilon` of the
//! sample mean (z·σ⁽ᵐ⁾ / (√m·μ⁽ᵐ⁾) < ε), subject to a minimum and maximum
//! sample count. Each sample's RNG is derived from (master seed, sample
//! index), and transients are accumulated as exact integers, so results are
//! identical regardless of how many worker threads run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{GrowthSeries, SeriesPoint};
use crate::dynamics::{measure_trajectory, Budget, System};
use crate::seed::{self, domain};

/// Stopping-rule and budget settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSettings {
    /// Target relative half-width of the confidence interval.
    pub epsilon: f64,
    /// Samples drawn between stopping-rule evaluations.
    pub batch_size: usize,
    /// Normal quantile for the interval (defaults to the 97.5% point).
    pub z: f64,
    /// Samples required before the rule may fire.
    pub min_samples: usize,
    /// Hard cap on completed samples.
    pub max_samples: usize,
    /// Per-trajectory budget.
    pub budget: Budget,
}

impl Default for EstimateSettings {
    fn default() -> Self {
        EstimateSettings {
            epsilon: 0.1,
            batch_size: 20,
            z: 1.959964,
            min_samples: 40,
            max_samples: 5000,
            budget: Budget::default(),
        }
    }
}

impl EstimateSettings {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(EstimatorError::BadSettings(format!(
                "epsilon {} out of range (0, 1)",
                self.epsilon
            )));
        }
        if self.batch_size < 2 {
            return Err(EstimatorError::BadSettings(format!(
                "batch size {} below 2",
                self.batch_size
            )));
        }
        if self.min_samples < 2 * self.batch_size {
            return Err(EstimatorError::BadSettings(format!(
                "min samples {} below two batches of {}",
                self.min_samples, self.batch_size
            )));
        }
        if self.max_samples < self.min_samples {
            return Err(EstimatorError::BadSettings(format!(
                "max samples {} below min samples {}",
                self.max_samples, self.min_samples
            )));
        }
        if !(self.z > 0.0) {
            return Err(EstimatorError::BadSettings(format!(
                "z {} not positive",
                self.z
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EstimatorError {
    #[error("invalid estimate settings: {0}")]
    BadSettings(String),
    #[error("sizes must be strictly increasing")]
    SizesNotIncreasing,
}

/// Why sampling stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    /// Relative half-width fell below epsilon.
    Converged,
    /// Hit the sample cap before converging.
    SampleCapReached,
    /// Too many trajectories exhausted their budget; the estimate is not
    /// trustworthy.
    BudgetLimited,
    /// The sample mean is exactly zero (every sampled transient was zero),
    /// so the relative rule is undefined; zero is reported directly.
    DegenerateZero,
}

/// An average-transient estimate for one (system, size).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientEstimate {
    /// Sample mean of the completed transients.
    pub mean: f64,
    /// Sample standard deviation (m−1 denominator).
    pub std: f64,
    /// Completed sample count.
    pub m: usize,
    /// z·std / (√m·mean), present when mean > 0 and m ≥ 2.
    pub rel_halfwidth: Option<f64>,
    pub status: EstimateStatus,
    /// Trajectories attempted, including budget-exhausted ones.
    pub attempted: usize,
    /// Trajectories that exhausted their budget (excluded from the mean).
    pub exhausted: usize,
}

/// Exact integer accumulation of completed transients; insensitive to
/// accumulation order.
#[derive(Default)]
struct Accumulator {
    sum: u128,
    sum_sq: u128,
    m: usize,
    attempted: usize,
    exhausted: usize,
}

impl Accumulator {
    fn push(&mut self, outcome: Option<u64>) {
        self.attempted += 1;
        match outcome {
            Some(t) => {
                self.sum += u128::from(t);
                self.sum_sq += u128::from(t) * u128::from(t);
                self.m += 1;
            }
            None => self.exhausted += 1,
        }
    }

    fn mean(&self) -> f64 {
        if self.m == 0 {
            0.0
        } else {
            self.sum as f64 / self.m as f64
        }
    }

    fn std(&self) -> f64 {
        if self.m < 2 {
            return 0.0;
        }
        let m = self.m as u128;
        // m·Σt² − (Σt)² is exact and non-negative.
        let numerator = m * self.sum_sq - self.sum * self.sum;
        let denominator = m * (m - 1);
        (numerator as f64 / denominator as f64).sqrt()
    }

    fn rel_halfwidth(&self, z: f64) -> Option<f64> {
        let mean = self.mean();
        if mean > 0.0 && self.m >= 2 {
            Some(z * self.std() / ((self.m as f64).sqrt() * mean))
        } else {
            None
        }
    }

    fn estimate(&self, z: f64, status: EstimateStatus) -> TransientEstimate {
        TransientEstimate {
            mean: self.mean(),
            std: self.std(),
            m: self.m,
            rel_halfwidth: self.rel_halfwidth(z),
            status,
            attempted: self.attempted,
            exhausted: self.exhausted,
        }
    }
}

/// Fraction of attempted trajectories allowed to exhaust their budget before
/// the whole estimate is declared [`EstimateStatus::BudgetLimited`].
pub const BUDGET_LIMITED_FRACTION: f64 = 0.2;

/// Estimate the average transient of one system.
///
/// Sample `i` draws its initial configuration from an RNG seeded by
/// `(seed, i)`, so the result does not depend on the rayon worker count.
pub fn estimate_average_transient<S>(
    system: &S,
    settings: &EstimateSettings,
    seed_value: u64,
) -> Result<TransientEstimate, EstimatorError>
where
    S: System + Sync,
    S::Config: Send,
{
    settings.validate()?;
    let mut acc = Accumulator::default();
    let mut next_index: u64 = 0;
    loop {
        let outcomes: Vec<Option<u64>> = (next_index..next_index + settings.batch_size as u64)
            .into_par_iter()
            .map(|i| {
                let sample_seed = seed::derive(seed_value, domain::SAMPLE, i);
                let initial = system.sample_uniform(&mut seed::rng_from(sample_seed));
                measure_trajectory(system, &initial, &settings.budget).transient()
            })
            .collect();
        next_index += settings.batch_size as u64;
        for outcome in outcomes {
            acc.push(outcome);
        }

        if acc.exhausted as f64 > BUDGET_LIMITED_FRACTION * acc.attempted as f64 {
            return Ok(acc.estimate(settings.z, EstimateStatus::BudgetLimited));
        }
        if acc.m >= settings.min_samples {
            if acc.sum == 0 {
                return Ok(acc.estimate(settings.z, EstimateStatus::DegenerateZero));
            }
            if acc
                .rel_halfwidth(settings.z)
                .is_some_and(|rel| rel < settings.epsilon)
            {
                return Ok(acc.estimate(settings.z, EstimateStatus::Converged));
            }
        }
        if acc.m >= settings.max_samples {
            return Ok(acc.estimate(settings.z, EstimateStatus::SampleCapReached));
        }
    }
}

/// The per-size seed used by [`growth_series`]; exposed so that callers
/// running sizes one at a time (e.g. with persistence between sizes) produce
/// identical results.
pub fn size_seed(master: u64, size: u32) -> u64 {
    seed::derive(master, domain::SERIES_SIZE, u64::from(size))
}

/// Consecutive budget-limited sizes after which a growth series gives up.
/// One limited size can be modular structure (a bijective size with a huge
/// attractor between measurable sizes); two in a row means the budget wall
/// has truly been reached — beyond it sizes only get more expensive.
pub const SERIES_STOP_AFTER_LIMITED: usize = 2;

/// Estimate the average transient for each system in a size-indexed family.
///
/// Sizes must be strictly increasing. Budget-limited sizes are excluded
/// from the usable points and reported in [`GrowthSeries::limited`]; the
/// series stops after [`SERIES_STOP_AFTER_LIMITED`] consecutive limited
/// sizes.
pub fn growth_series<S>(
    systems: &[(u32, S)],
    settings: &EstimateSettings,
    seed_value: u64,
) -> Result<GrowthSeries, EstimatorError>
where
    S: System + Sync,
    S::Config: Send,
{
    settings.validate()?;
    if systems.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(EstimatorError::SizesNotIncreasing);
    }
    let mut points = Vec::with_capacity(systems.len());
    let mut limited = Vec::new();
    let mut consecutive_limited = 0usize;
    for (size, system) in systems {
        let estimate = estimate_average_transient(system, settings, size_seed(seed_value, *size))?;
        let point = SeriesPoint {
            size: *size,
            estimate,
        };
        if estimate.status == EstimateStatus::BudgetLimited {
            limited.push(point);
            consecutive_limited += 1;
            if consecutive_limited >= SERIES_STOP_AFTER_LIMITED {
                break;
            }
        } else {
            consecutive_limited = 0;
            points.push(point);
        }
    }
    Ok(GrowthSeries { points, limited })
}

/// Estimate the typical average transient over an ensemble of systems.
///
/// `generator` maps a derived seed to a system; ensemble member `i` is
/// generated from `(seed, i)` and its average transient estimated with an
/// inner run of [`estimate_average_transient`]. The same relative half-width
/// rule (same ε and z, evaluated every `outer_batch` members after
/// 2·`outer_batch` members exist) decides when to stop drawing members. A
/// budget-limited inner estimate makes the whole ensemble budget-limited.
pub fn estimate_ensemble_average<S, G>(
    generator: G,
    settings: &EstimateSettings,
    outer_batch: usize,
    seed_value: u64,
) -> Result<TransientEstimate, EstimatorError>
where
    S: System + Sync,
    S::Config: Send,
    G: Fn(u64) -> S + Sync,
{
    settings.validate()?;
    if outer_batch < 2 {
        return Err(EstimatorError::BadSettings(format!(
            "outer batch {outer_batch} below 2"
        )));
    }
    let min_outer = 2 * outer_batch;
    let mut values: Vec<f64> = Vec::new();
    let mut next_index: u64 = 0;
    loop {
        let batch: Vec<Result<TransientEstimate, EstimatorError>> = (next_index
            ..next_index + outer_batch as u64)
            .into_par_iter()
            .map(|i| {
                let system = generator(seed::derive(seed_value, domain::ENSEMBLE_SYSTEM, i));
                estimate_average_transient(
                    &system,
                    settings,
                    seed::derive(seed_value, domain::ENSEMBLE_ESTIMATE, i),
                )
            })
            .collect();
        next_index += outer_batch as u64;
        let mut attempted_total = 0usize;
        let mut exhausted_total = 0usize;
        for inner in batch {
            let inner = inner?;
            attempted_total += inner.attempted;
            exhausted_total += inner.exhausted;
            if inner.status == EstimateStatus::BudgetLimited {
                return Ok(TransientEstimate {
                    mean: mean_of(&values),
                    std: std_of(&values),
                    m: values.len(),
                    rel_halfwidth: None,
                    status: EstimateStatus::BudgetLimited,
                    attempted: attempted_total,
                    exhausted: exhausted_total,
                });
            }
            values.push(inner.mean);
        }

        let m = values.len();
        if m >= min_outer {
            let mean = mean_of(&values);
            let std = std_of(&values);
            if mean == 0.0 {
                return Ok(outer_estimate(
                    &values,
                    EstimateStatus::DegenerateZero,
                    settings.z,
                ));
            }
            let rel = settings.z * std / ((m as f64).sqrt() * mean);
            if rel < settings.epsilon {
                return Ok(outer_estimate(
                    &values,
                    EstimateStatus::Converged,
                    settings.z,
                ));
            }
        }
        if m >= settings.max_samples {
            return Ok(outer_estimate(
                &values,
                EstimateStatus::SampleCapReached,
                settings.z,
            ));
        }
    }
}

fn mean_of(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn std_of(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = mean_of(values);
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

fn outer_estimate(values: &[f64], status: EstimateStatus, z: f64) -> TransientEstimate {
    let mean = mean_of(values);
    let std = std_of(values);
    let m = values.len();
    TransientEstimate {
        mean,
        std,
        m,
        rel_halfwidth: (mean > 0.0 && m >= 2).then(|| z * std / ((m as f64).sqrt() * mean)),
        status,
        attempted: m,
        exhausted: 0,
    }
}
