//! General one-dimensional CA rules: arbitrary radius and state count,
//! lookup-table or totalistic.

use rand::Rng;

use crate::dynamics::{EnumerableSystem, System};

use super::CaError;

/// How a neighborhood window maps to the next state.
#[derive(Debug, Clone, PartialEq, Eq)]
enum RuleKind {
    /// Full lookup table with q^(2r+1) entries. The window is read as a
    /// base-q number with the leftmost cell carrying the highest weight, so
    /// for q = 2, r = 1 the indexing coincides with Wolfram numbering.
    Lookup { table: Box<[u8]> },
    /// Next state depends only on the window's state sum: digit s of the
    /// code (base q, least significant digit = sum 0) for sums
    /// 0 ..= (2r+1)(q−1).
    Totalistic { code: u64, digits: Box<[u8]> },
}

/// A 1D CA local rule over `states` states with the given radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ca1dRule {
    states: u8,
    radius: u8,
    kind: RuleKind,
}

impl Ca1dRule {
    fn check_params(states: u16, radius: u8) -> Result<(), CaError> {
        if !(2..=16).contains(&states) {
            return Err(CaError::BadStateCount { states });
        }
        if !(1..=4).contains(&radius) {
            return Err(CaError::BadRadius { radius });
        }
        Ok(())
    }

    /// Rule from a full lookup table of q^(2r+1) entries.
    pub fn from_lookup(states: u8, radius: u8, table: Vec<u8>) -> Result<Self, CaError> {
        Self::check_params(u16::from(states), radius)?;
        let expected = usize::from(states).pow(2 * u32::from(radius) + 1);
        if table.len() != expected {
            return Err(CaError::BadTableLength {
                got: table.len(),
                expected,
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= states) {
            return Err(CaError::BadTableEntry { value: bad, states });
        }
        Ok(Ca1dRule {
            states,
            radius,
            kind: RuleKind::Lookup {
                table: table.into_boxed_slice(),
            },
        })
    }

    /// The elementary CA with the given Wolfram number, as a general rule.
    pub fn from_wolfram(number: u8) -> Self {
        let table = (0..8u8).map(|i| (number >> i) & 1).collect();
        Ca1dRule::from_lookup(2, 1, table).expect("8-entry binary table is always valid")
    }

    /// A binary radius-r rule from its table-as-integer in hex: bit i of the
    /// hex value is the next state for window value i (the radius-r analogue
    /// of a Wolfram number; 2^(2r+1) bits).
    pub fn from_binary_hex(radius: u8, hex: &str) -> Result<Self, CaError> {
        Self::check_params(2, radius)?;
        let entries = 1usize << (2 * u32::from(radius) + 1);
        let digits_needed = entries / 4;
        let cleaned = hex.trim();
        if cleaned.is_empty() || cleaned.len() > digits_needed {
            return Err(CaError::Format(format!(
                "binary radius-{radius} rule needs 1..={digits_needed} hex digits, got {}",
                cleaned.len()
            )));
        }
        let mut table = vec![0u8; entries];
        // Hex digit d (from the right) holds entries 4d .. 4d+3.
        for (pos, ch) in cleaned.chars().rev().enumerate() {
            let value = ch
                .to_digit(16)
                .ok_or_else(|| CaError::Format(format!("bad hex digit {ch:?}")))?;
            for bit in 0..4 {
                table[pos * 4 + bit] = ((value >> bit) & 1) as u8;
            }
        }
        Ca1dRule::from_lookup(2, radius, table)
    }

    /// The table-as-integer hex string for a binary rule (inverse of
    /// [`Ca1dRule::from_binary_hex`]).
    pub fn to_binary_hex(&self) -> Option<String> {
        if self.states != 2 {
            return None;
        }
        let table = self.expanded_table();
        let digits = table.len() / 4;
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut value = 0u32;
            for bit in 0..4 {
                value |= u32::from(table[d * 4 + bit]) << bit;
            }
            out.push(char::from_digit(value, 16).unwrap());
        }
        Some(out)
    }

    /// Totalistic rule from its code: digit s of `code` in base q is the
    /// next state for neighborhood sum s.
    pub fn from_totalistic_code(code: u64, states: u8, radius: u8) -> Result<Self, CaError> {
        Self::check_params(u16::from(states), radius)?;
        let sums = (2 * u32::from(radius) + 1) * (u32::from(states) - 1) + 1;
        let limit = (u64::from(states)).checked_pow(sums);
        if limit.is_some_and(|l| code >= l) {
            return Err(CaError::BadTotalisticCode {
                code,
                states,
                radius,
            });
        }
        let mut digits = vec![0u8; sums as usize];
        let mut rest = code;
        for d in digits.iter_mut() {
            *d = (rest % u64::from(states)) as u8;
            rest /= u64::from(states);
        }
        Ok(Ca1dRule {
            states,
            radius,
            kind: RuleKind::Totalistic {
                code,
                digits: digits.into_boxed_slice(),
            },
        })
    }

    /// The totalistic code, if this is a totalistic rule.
    pub fn totalistic_code(&self) -> Option<u64> {
        match &self.kind {
            RuleKind::Totalistic { code, .. } => Some(*code),
            RuleKind::Lookup { .. } => None,
        }
    }

    pub fn states(&self) -> u8 {
        self.states
    }

    pub fn radius(&self) -> u8 {
        self.radius
    }

    /// Window width 2r+1.
    pub fn window(&self) -> usize {
        2 * usize::from(self.radius) + 1
    }

    /// Next state for a window of 2r+1 cells, leftmost first.
    pub fn next(&self, window: &[u8]) -> u8 {
        debug_assert_eq!(window.len(), self.window());
        match &self.kind {
            RuleKind::Lookup { table } => {
                let mut idx = 0usize;
                for &c in window {
                    idx = idx * usize::from(self.states) + usize::from(c);
                }
                table[idx]
            }
            RuleKind::Totalistic { digits, .. } => {
                let sum: usize = window.iter().map(|&c| usize::from(c)).sum();
                digits[sum]
            }
        }
    }

    /// The rule as a full lookup table (totalistic rules are expanded).
    pub fn expanded_table(&self) -> Vec<u8> {
        let entries = usize::from(self.states).pow(2 * u32::from(self.radius) + 1);
        let mut window = vec![0u8; self.window()];
        (0..entries)
            .map(|idx| {
                let mut rest = idx;
                for j in (0..window.len()).rev() {
                    window[j] = (rest % usize::from(self.states)) as u8;
                    rest /= usize::from(self.states);
                }
                self.next(&window)
            })
            .collect()
    }
}

/// A 1D CA on a cyclic grid of `n` cells, one byte per cell.
#[derive(Debug, Clone)]
pub struct Ca1dSystem {
    rule: Ca1dRule,
    n: u32,
}

impl Ca1dSystem {
    pub fn new(rule: Ca1dRule, n: u32) -> Result<Self, CaError> {
        if (n as usize) < rule.window() {
            return Err(CaError::GridTooSmall {
                n,
                radius: rule.radius(),
            });
        }
        Ok(Ca1dSystem { rule, n })
    }

    pub fn rule(&self) -> &Ca1dRule {
        &self.rule
    }

    pub fn grid_len(&self) -> u32 {
        self.n
    }
}

impl System for Ca1dSystem {
    type Config = Vec<u8>;

    fn config_space_log2(&self) -> f64 {
        f64::from(self.n) * f64::from(self.rule.states).log2()
    }

    fn step(&self, config: &Vec<u8>) -> Vec<u8> {
        let mut next = vec![0u8; config.len()];
        self.step_into(config, &mut next);
        next
    }

    fn step_into(&self, src: &Vec<u8>, dst: &mut Vec<u8>) {
        let n = self.n as usize;
        dst.resize(n, 0);
        let r = usize::from(self.rule.radius());
        let mut window = vec![0u8; self.rule.window()];
        for (i, out) in dst.iter_mut().enumerate() {
            for (j, w) in window.iter_mut().enumerate() {
                *w = src[(i + n + j - r) % n];
            }
            *out = self.rule.next(&window);
        }
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        (0..self.n)
            .map(|_| rng.random_range(0..self.rule.states))
            .collect()
    }

    fn encode(&self, config: &Vec<u8>) -> Vec<u8> {
        if self.rule.states == 2 {
            // Binary grids pack to one bit per cell.
            let mut out = vec![0u8; (self.n as usize).div_ceil(8)];
            for (i, &c) in config.iter().enumerate() {
                out[i / 8] |= c << (i % 8);
            }
            out
        } else {
            config.clone()
        }
    }
}

impl EnumerableSystem for Ca1dSystem {
    fn config_count(&self) -> Option<u64> {
        u64::from(self.rule.states).checked_pow(self.n)
    }

    fn config_at(&self, index: u64) -> Vec<u8> {
        let q = u64::from(self.rule.states);
        let mut rest = index;
        (0..self.n)
            .map(|_| {
                let c = (rest % q) as u8;
                rest /= q;
                c
            })
            .collect()
    }

    fn index_of(&self, config: &Vec<u8>) -> u64 {
        let q = u64::from(self.rule.states);
        config
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * q + u64::from(c))
    }
}
