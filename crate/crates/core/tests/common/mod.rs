//! Shared test oracles, deliberately independent of the measurement path
//! they check: trajectories are replayed with full state storage instead of
//! constant-memory cycle detection.
#![allow(dead_code)] // each test target uses a subset

use std::collections::HashMap;

use transients_core::dynamics::System;

/// Store-every-state trajectory measurement: walk from `initial` recording
/// each encoded configuration with its step index; the first repeat at index
/// j of a state first seen at index i gives transient i and period j − i.
/// Returns `None` if no repeat occurs within `cap` steps.
pub fn naive_trajectory<S: System>(
    system: &S,
    initial: &S::Config,
    cap: u64,
) -> Option<(u64, u64)> {
    let mut seen: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut current = initial.clone();
    let mut index = 0u64;
    loop {
        match seen.entry(system.encode(&current)) {
            std::collections::hash_map::Entry::Occupied(entry) => {
                let first = *entry.get();
                return Some((first, index - first));
            }
            std::collections::hash_map::Entry::Vacant(entry) => {
                entry.insert(index);
            }
        }
        if index >= cap {
            return None;
        }
        current = system.step(&current);
        index += 1;
    }
}

/// Check the defining identities of a (transient, period) result by
/// re-simulation: F^t(u) = F^(t+p)(u); if t > 0 then
/// F^(t−1)(u) ≠ F^(t−1+p)(u); and F^t(u) ≠ F^(t+d)(u) for every proper
/// divisor d of p.
pub fn verify_minimality<S: System>(
    system: &S,
    initial: &S::Config,
    transient: u64,
    period: u64,
) -> bool {
    let total = (transient + 2 * period) as usize;
    let mut encoded = Vec::with_capacity(total + 1);
    let mut current = initial.clone();
    for _ in 0..=total {
        encoded.push(system.encode(&current));
        current = system.step(&current);
    }
    let t = transient as usize;
    let p = period as usize;
    if encoded[t] != encoded[t + p] {
        return false;
    }
    if t > 0 && encoded[t - 1] == encoded[t - 1 + p] {
        return false;
    }
    for d in 1..p {
        if p % d == 0 && encoded[t] == encoded[t + d] {
            return false;
        }
    }
    true
}
