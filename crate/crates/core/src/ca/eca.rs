//! Elementary cellular automata: binary states, radius-1 neighborhood,
//! identified by Wolfram number.

use rand::Rng;

use crate::dynamics::{EnumerableSystem, System};

use super::CaError;

/// An elementary CA local rule f: {0,1}³ → {0,1}.
///
/// Table index `4·left + 2·center + right` holds `f(left, center, right)`;
/// the Wolfram number is Σᵢ f(i)·2ⁱ, so f(0,0,0) carries weight 2⁰ and
/// f(1,1,1) weight 2⁷.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EcaRule {
    number: u8,
    table: [u8; 8],
}

impl EcaRule {
    /// Build the rule table from a Wolfram number.
    pub fn from_wolfram(number: u8) -> Self {
        let mut table = [0u8; 8];
        for (i, entry) in table.iter_mut().enumerate() {
            *entry = (number >> i) & 1;
        }
        EcaRule { number, table }
    }

    pub fn number(&self) -> u8 {
        self.number
    }

    pub fn table(&self) -> &[u8; 8] {
        &self.table
    }

    /// Evaluate the local rule.
    pub fn next(&self, left: u8, center: u8, right: u8) -> u8 {
        self.table[usize::from(4 * left + 2 * center + right)]
    }

    fn from_table(table: [u8; 8]) -> Self {
        let number = table
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, &bit)| acc | (bit << i));
        EcaRule { number, table }
    }

    /// The rule with the roles of left and right neighbor exchanged:
    /// f'(x,y,z) = f(z,y,x).
    pub fn reflected(&self) -> EcaRule {
        let mut table = [0u8; 8];
        for idx in 0..8usize {
            let (x, y, z) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            table[idx] = self.table[(z << 2) | (y << 1) | x];
        }
        EcaRule::from_table(table)
    }

    /// The rule with the roles of states 0 and 1 exchanged:
    /// f'(x,y,z) = 1 − f(1−x, 1−y, 1−z).
    pub fn complemented(&self) -> EcaRule {
        let mut table = [0u8; 8];
        for idx in 0..8usize {
            table[idx] = 1 - self.table[7 - idx];
        }
        EcaRule::from_table(table)
    }

    /// Minimum Wolfram number over the four reflection/complement images.
    /// Rules sharing this number have isomorphic phase spaces on every grid.
    pub fn canonical_number(&self) -> u8 {
        let images = [
            self.number,
            self.reflected().number,
            self.complemented().number,
            self.reflected().complemented().number,
        ];
        images.into_iter().min().unwrap()
    }
}

/// The canonical representatives of the elementary CA equivalence classes,
/// in ascending order.
pub fn canonical_representatives() -> Vec<u8> {
    let mut reps: Vec<u8> = (0..=255u8)
        .map(|k| EcaRule::from_wolfram(k).canonical_number())
        .collect();
    reps.sort_unstable();
    reps.dedup();
    reps
}

/// An elementary CA on a cyclic grid of up to 64 cells, one bit per cell.
///
/// The whole grid updates in a handful of word operations: each of the eight
/// neighborhood patterns is matched against all cells at once via masked
/// rotations.
#[derive(Debug, Clone)]
pub struct EcaSystem {
    rule: EcaRule,
    n: u32,
    mask: u64,
}

impl EcaSystem {
    pub fn new(rule: EcaRule, n: u32) -> Result<Self, CaError> {
        if n < 3 {
            return Err(CaError::GridTooSmall { n, radius: 1 });
        }
        if n > 64 {
            return Err(CaError::GridTooWide { n, max: 64 });
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Ok(EcaSystem { rule, n, mask })
    }

    pub fn rule(&self) -> &EcaRule {
        &self.rule
    }

    pub fn grid_len(&self) -> u32 {
        self.n
    }

    /// Cell value at position `i` (bit `i` of the word).
    pub fn cell(&self, config: u64, i: u32) -> u8 {
        ((config >> i) & 1) as u8
    }

    fn step_word(&self, x: u64) -> u64 {
        let n = self.n;
        let mask = self.mask;
        // Bit i of `left` is cell i−1, of `right` is cell i+1 (cyclic).
        let left = ((x << 1) | (x >> (n - 1))) & mask;
        let right = ((x >> 1) | (x << (n - 1))) & mask;
        let mut out = 0u64;
        for pattern in 0..8u32 {
            if self.rule.table[pattern as usize] == 0 {
                continue;
            }
            let a = if pattern & 4 != 0 { left } else { !left };
            let b = if pattern & 2 != 0 { x } else { !x };
            let c = if pattern & 1 != 0 { right } else { !right };
            out |= a & b & c;
        }
        out & mask
    }
}

impl System for EcaSystem {
    type Config = u64;

    fn config_space_log2(&self) -> f64 {
        f64::from(self.n)
    }

    fn step(&self, config: &u64) -> u64 {
        self.step_word(*config)
    }

    fn step_into(&self, src: &u64, dst: &mut u64) {
        *dst = self.step_word(*src);
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random::<u64>() & self.mask
    }

    fn encode(&self, config: &u64) -> Vec<u8> {
        let bytes = (self.n as usize).div_ceil(8);
        config.to_le_bytes()[..bytes].to_vec()
    }
}

impl EnumerableSystem for EcaSystem {
    fn config_count(&self) -> Option<u64> {
        if self.n == 64 {
            None
        } else {
            Some(1u64 << self.n)
        }
    }

    fn config_at(&self, index: u64) -> u64 {
        index
    }

    fn index_of(&self, config: &u64) -> u64 {
        *config
    }
}
