//! The system abstraction and exact single-trajectory measurement.
//!
//! A [`System`] is a finite set of configurations together with a pure total
//! update map. [`measure_trajectory`] computes the exact transient (pre-period)
//! and period of one trajectory using Brent's cycle detection, which stores a
//! constant number of configurations regardless of trajectory length.
//! [`enumerate_phase_space`] walks every configuration of a small system and
//! is the exact reference the sampling estimator is checked against.

use std::hash::Hash;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

/// A deterministic discrete dynamical system on a finite configuration set.
///
/// Implementations must be immutable after construction: `step` is a pure
/// function, `encode` is injective, and `sample_uniform` draws uniformly over
/// the whole configuration set using only the supplied RNG.
pub trait System {
    /// A configuration. Equality and hashing must agree with [`System::encode`]:
    /// two configurations are equal exactly when their encodings are equal.
    type Config: Clone + Eq + Hash;

    /// log₂ of the configuration count (kept as a log; the count itself may
    /// exceed any machine integer).
    fn config_space_log2(&self) -> f64;

    /// Apply the update map once.
    fn step(&self, config: &Self::Config) -> Self::Config;

    /// Apply the update map once, writing into an existing configuration.
    /// `src` and `dst` are distinct buffers. Hot loops use this to avoid
    /// per-step allocation.
    fn step_into(&self, src: &Self::Config, dst: &mut Self::Config) {
        *dst = self.step(src);
    }

    /// Draw a configuration uniformly at random.
    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Config;

    /// Canonical byte encoding; injective over the configuration set.
    fn encode(&self, config: &Self::Config) -> Vec<u8>;
}

/// Systems small enough to index every configuration by an integer.
///
/// `config_at` and `index_of` must be mutually inverse bijections between
/// `0..config_count()` and the configuration set.
pub trait EnumerableSystem: System {
    /// Total number of configurations, or `None` if it overflows `u64`.
    fn config_count(&self) -> Option<u64>;

    /// The configuration with the given index.
    fn config_at(&self, index: u64) -> Self::Config;

    /// The index of a configuration.
    fn index_of(&self, config: &Self::Config) -> u64;
}

/// Draw a configuration from the seeded sampler. Convenience for callers that
/// do not want to manage an RNG.
pub fn seeded_config<S: System>(system: &S, seed_value: u64) -> S::Config {
    system.sample_uniform(&mut seed::rng_from(seed_value))
}

/// Per-trajectory simulation limits.
///
/// `step_cap` bounds the total number of update applications spent on one
/// trajectory (across all phases of cycle detection); `wall` bounds the
/// elapsed time. Either limit firing yields [`TrajectoryResult::BudgetExhausted`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub step_cap: u64,
    pub wall: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            step_cap: 100_000_000,
            wall: Duration::from_secs(40),
        }
    }
}

impl Budget {
    pub fn with_step_cap(step_cap: u64) -> Self {
        Budget {
            step_cap,
            ..Budget::default()
        }
    }
}

/// Exact transient/period of one trajectory, or the marker that the budget
/// ran out before the cycle was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryResult {
    Completed { transient: u64, period: u64 },
    BudgetExhausted,
}

impl TrajectoryResult {
    pub fn is_completed(&self) -> bool {
        matches!(self, TrajectoryResult::Completed { .. })
    }

    /// Transient length (steps before the cycle), if completed.
    pub fn transient(&self) -> Option<u64> {
        match *self {
            TrajectoryResult::Completed { transient, .. } => Some(transient),
            TrajectoryResult::BudgetExhausted => None,
        }
    }

    /// Cycle length, if completed.
    pub fn period(&self) -> Option<u64> {
        match *self {
            TrajectoryResult::Completed { period, .. } => Some(period),
            TrajectoryResult::BudgetExhausted => None,
        }
    }

    /// Steps until the first revisit: transient + period.
    pub fn rho(&self) -> Option<u64> {
        match *self {
            TrajectoryResult::Completed { transient, period } => Some(transient + period),
            TrajectoryResult::BudgetExhausted => None,
        }
    }
}

/// How often the wall clock is consulted, in steps.
const WALL_CHECK_INTERVAL: u64 = 4096;

struct StepMeter {
    used: u64,
    cap: u64,
    deadline: Instant,
}

impl StepMeter {
    fn new(budget: &Budget) -> Self {
        StepMeter {
            used: 0,
            cap: budget.step_cap,
            deadline: Instant::now() + budget.wall,
        }
    }

    /// Account for one applied step; `false` means the budget is gone.
    #[inline]
    fn tick(&mut self) -> bool {
        self.used += 1;
        if self.used >= self.cap {
            return false;
        }
        if self.used % WALL_CHECK_INTERVAL == 0 && Instant::now() >= self.deadline {
            return false;
        }
        true
    }
}

/// Measure the exact transient and period of the trajectory starting at
/// `initial`, within the given budget.
///
/// Uses Brent's algorithm: a power-of-two teleporting anchor finds the period
/// with O(1) stored configurations, then two cursors separated by one period
/// walk from the start to locate the first on-cycle configuration. A
/// configuration already on its attractor reports transient 0; a fixed point
/// reports (0, 1).
pub fn measure_trajectory<S: System>(
    system: &S,
    initial: &S::Config,
    budget: &Budget,
) -> TrajectoryResult {
    let mut meter = StepMeter::new(budget);

    // Phase 1: period search. `anchor` teleports to the hare's position
    // whenever the probe distance reaches a power of two, so the hare is
    // eventually anchored inside the cycle and the gap at match time is
    // exactly the period.
    let mut anchor = initial.clone();
    let mut hare = system.step(initial);
    let mut scratch = initial.clone();
    if !meter.tick() {
        return TrajectoryResult::BudgetExhausted;
    }
    let mut power: u64 = 1;
    let mut lam: u64 = 1;
    while anchor != hare {
        if power == lam {
            anchor.clone_from(&hare);
            power *= 2;
            lam = 0;
        }
        system.step_into(&hare, &mut scratch);
        std::mem::swap(&mut hare, &mut scratch);
        lam += 1;
        if !meter.tick() {
            return TrajectoryResult::BudgetExhausted;
        }
    }
    let period = lam;

    // Phase 2: transient search. Walk `ahead` to distance `period` from the
    // start, then advance both cursors until they meet; the meeting point is
    // the first configuration on the cycle.
    let mut ahead = initial.clone();
    for _ in 0..period {
        system.step_into(&ahead, &mut scratch);
        std::mem::swap(&mut ahead, &mut scratch);
        if !meter.tick() {
            return TrajectoryResult::BudgetExhausted;
        }
    }
    let mut behind = initial.clone();
    let mut transient: u64 = 0;
    while behind != ahead {
        system.step_into(&behind, &mut scratch);
        std::mem::swap(&mut behind, &mut scratch);
        system.step_into(&ahead, &mut scratch);
        std::mem::swap(&mut ahead, &mut scratch);
        transient += 1;
        if !meter.tick() || !meter.tick() {
            return TrajectoryResult::BudgetExhausted;
        }
    }

    TrajectoryResult::Completed { transient, period }
}

/// Enumeration refuses systems above this many configuration bits.
pub const ENUMERATION_GUARD_LOG2: f64 = 24.0;

#[derive(Debug, Error, PartialEq)]
pub enum EnumerateError {
    #[error("configuration space too large to enumerate: log2|S| = {log2:.2} exceeds {guard}")]
    TooLarge { log2: f64, guard: f64 },
}

/// Exact transient and period for every configuration index of a small
/// system, as flat arrays indexed by configuration index.
///
/// Single pass over the functional graph: each walk either discovers a new
/// cycle or reaches an already-resolved configuration, and results propagate
/// back along the walked path, so total work is linear in the configuration
/// count.
fn phase_space_tables<S: EnumerableSystem>(
    system: &S,
) -> Result<(Vec<u32>, Vec<u32>), EnumerateError> {
    let log2 = system.config_space_log2();
    let count = match system.config_count() {
        Some(c) if log2 <= ENUMERATION_GUARD_LOG2 && c <= (1u64 << 24) => c as usize,
        _ => {
            return Err(EnumerateError::TooLarge {
                log2,
                guard: ENUMERATION_GUARD_LOG2,
            })
        }
    };

    const UNKNOWN: u32 = u32::MAX;
    let mut transient = vec![UNKNOWN; count];
    let mut period = vec![0u32; count];
    // Position of a configuration on the walk currently in progress.
    let mut on_path = vec![UNKNOWN; count];
    let mut path: Vec<u32> = Vec::new();

    for start in 0..count {
        if transient[start] != UNKNOWN {
            continue;
        }
        path.clear();
        let mut cur = start;
        loop {
            if transient[cur] != UNKNOWN {
                // Reached resolved territory: everything on the path feeds
                // into `cur`'s component.
                let base_t = transient[cur];
                let p = period[cur];
                for (pos, &node) in path.iter().enumerate() {
                    transient[node as usize] = base_t + (path.len() - pos) as u32;
                    period[node as usize] = p;
                }
                break;
            }
            if on_path[cur] != UNKNOWN {
                // Closed a new cycle within this walk.
                let cycle_start = on_path[cur] as usize;
                let p = (path.len() - cycle_start) as u32;
                for &node in &path[cycle_start..] {
                    transient[node as usize] = 0;
                    period[node as usize] = p;
                }
                for (pos, &node) in path[..cycle_start].iter().enumerate() {
                    transient[node as usize] = (cycle_start - pos) as u32;
                    period[node as usize] = p;
                }
                break;
            }
            on_path[cur] = path.len() as u32;
            path.push(cur as u32);
            cur = system.index_of(&system.step(&system.config_at(cur as u64))) as usize;
        }
        for &node in &path {
            on_path[node as usize] = UNKNOWN;
        }
    }

    Ok((transient, period))
}

/// Exact transient and period for every configuration of a small system.
pub fn enumerate_phase_space<S: EnumerableSystem>(
    system: &S,
) -> Result<Vec<(S::Config, TrajectoryResult)>, EnumerateError> {
    let (transient, period) = phase_space_tables(system)?;
    Ok((0..transient.len())
        .map(|i| {
            (
                system.config_at(i as u64),
                TrajectoryResult::Completed {
                    transient: u64::from(transient[i]),
                    period: u64::from(period[i]),
                },
            )
        })
        .collect())
}

/// Exact average transient T = (1/|S|) Σ t_u of a small system.
pub fn exact_average_transient<S: EnumerableSystem>(system: &S) -> Result<f64, EnumerateError> {
    let (transient, _) = phase_space_tables(system)?;
    let sum: u64 = transient.iter().map(|&t| u64::from(t)).sum();
    Ok(sum as f64 / transient.len() as f64)
}
