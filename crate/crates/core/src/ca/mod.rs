//! Cellular automaton system families.
//!
//! - [`EcaRule`] / [`EcaSystem`] — elementary CAs (binary, radius 1) with
//!   Wolfram numbering and the reflection/complement equivalence reduction;
//!   grids up to 64 cells run in a single machine word.
//! - [`Ca1dRule`] / [`Ca1dSystem`] — general 1D rules: arbitrary radius and
//!   state count, lookup-table or totalistic.
//! - [`Ca2dRule`] / [`Ca2dSystem`] — multi-state 3×3-neighborhood rules on an
//!   n×n torus, constant on the symmetry orbits of the square; includes the
//!   Game of Life as a built-in rule.
//!
//! All grids are periodic in every dimension.

mod eca;
mod format;
mod grid2d;
mod rule1d;

pub use eca::{canonical_representatives, EcaRule, EcaSystem};
pub use format::{parse_rule_file, render_rule_file, CaRuleSpec};
pub use grid2d::{Ca2dRule, Ca2dSystem, D4_TRANSFORM_COUNT};
pub use rule1d::{Ca1dRule, Ca1dSystem};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CaError {
    #[error("grid of {n} cells cannot hold a radius-{radius} neighborhood")]
    GridTooSmall { n: u32, radius: u8 },
    #[error("grid of {n} cells exceeds the {max}-cell word backing this system")]
    GridTooWide { n: u32, max: u32 },
    #[error("state count {states} out of range (need 2..=16)")]
    BadStateCount { states: u16 },
    #[error("radius {radius} out of range (need 1..=4)")]
    BadRadius { radius: u8 },
    #[error("lookup table has {got} entries, expected {expected}")]
    BadTableLength { got: usize, expected: usize },
    #[error("table entry {value} is not a state below {states}")]
    BadTableEntry { value: u8, states: u8 },
    #[error("totalistic code {code} too large for {states} states and radius {radius}")]
    BadTotalisticCode { code: u64, states: u8, radius: u8 },
    #[error("rule table is not constant on square-symmetry orbits")]
    NotSymmetric,
    #[error("orbit digit string has {got} digits, expected {expected}")]
    BadOrbitDigits { got: usize, expected: usize },
    #[error("rule file: {0}")]
    Format(String),
}
