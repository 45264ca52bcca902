//! Two-dimensional CAs with a 3×3 Moore neighborhood on an n×n torus.
//!
//! Rules are required to be constant on the orbits of the square's symmetry
//! group (rotations and reflections), so applying the rule commutes with any
//! symmetry of the grid.

use rand::Rng;

use crate::dynamics::{EnumerableSystem, System};
use crate::seed;

use super::CaError;

/// The eight symmetries of the square.
pub const D4_TRANSFORM_COUNT: usize = 8;

/// Permutations of the 3×3 patch positions (row-major 0..9) under each
/// square symmetry: entry `perm[k]` is the source position whose cell lands
/// at position `k`.
fn d4_permutations() -> [[usize; 9]; D4_TRANSFORM_COUNT] {
    let rotate = |(r, c): (usize, usize)| (c, 2 - r);
    let flip = |(r, c): (usize, usize)| (r, 2 - c);
    let mut perms = [[0usize; 9]; D4_TRANSFORM_COUNT];
    for (t, perm) in perms.iter_mut().enumerate() {
        for k in 0..9 {
            let mut pos = (k / 3, k % 3);
            for _ in 0..t % 4 {
                pos = rotate(pos);
            }
            if t >= 4 {
                pos = flip(pos);
            }
            perm[k] = pos.0 * 3 + pos.1;
        }
    }
    perms
}

/// A 2D rule: next state for every 3×3 patch, constant on square-symmetry
/// orbits. The patch index is Σₖ cellₖ·qᵏ with k the row-major position.
#[derive(Clone, PartialEq, Eq)]
pub struct Ca2dRule {
    states: u8,
    table: Box<[u8]>,
}

impl std::fmt::Debug for Ca2dRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ca2dRule")
            .field("states", &self.states)
            .field("table_len", &self.table.len())
            .finish()
    }
}

impl Ca2dRule {
    fn patch_count(states: u8) -> usize {
        usize::from(states).pow(9)
    }

    /// Decompose a patch index into its 9 cells.
    fn patch_cells(states: u8, index: usize) -> [u8; 9] {
        let q = usize::from(states);
        let mut cells = [0u8; 9];
        let mut rest = index;
        for cell in cells.iter_mut() {
            *cell = (rest % q) as u8;
            rest /= q;
        }
        cells
    }

    fn patch_index(states: u8, cells: &[u8; 9]) -> usize {
        let q = usize::from(states);
        cells
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * q + usize::from(c))
    }

    /// Smallest patch index in the symmetry orbit of `index`.
    fn canonical_patch(states: u8, perms: &[[usize; 9]; 8], index: usize) -> usize {
        let cells = Self::patch_cells(states, index);
        let mut best = usize::MAX;
        for perm in perms {
            let mut image = [0u8; 9];
            for (k, &src) in perm.iter().enumerate() {
                image[k] = cells[src];
            }
            best = best.min(Self::patch_index(states, &image));
        }
        best
    }

    /// Validate symmetry and build the rule from a full table.
    pub fn from_table(states: u8, table: Vec<u8>) -> Result<Self, CaError> {
        if !(2..=5).contains(&states) {
            return Err(CaError::BadStateCount {
                states: u16::from(states),
            });
        }
        let expected = Self::patch_count(states);
        if table.len() != expected {
            return Err(CaError::BadTableLength {
                got: table.len(),
                expected,
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= states) {
            return Err(CaError::BadTableEntry { value: bad, states });
        }
        let perms = d4_permutations();
        for idx in 0..expected {
            if table[Self::canonical_patch(states, &perms, idx)] != table[idx] {
                return Err(CaError::NotSymmetric);
            }
        }
        Ok(Ca2dRule {
            states,
            table: table.into_boxed_slice(),
        })
    }

    /// Ascending patch indices that are their own orbit representative.
    pub fn orbit_representatives(states: u8) -> Vec<u32> {
        let perms = d4_permutations();
        (0..Self::patch_count(states))
            .filter(|&idx| Self::canonical_patch(states, &perms, idx) == idx)
            .map(|idx| idx as u32)
            .collect()
    }

    /// Draw a rule uniformly over all symmetric rules: one independent
    /// uniform state per orbit. Deterministic per seed.
    pub fn sample_symmetric(states: u8, seed_value: u64) -> Result<Self, CaError> {
        if !(2..=5).contains(&states) {
            return Err(CaError::BadStateCount {
                states: u16::from(states),
            });
        }
        let perms = d4_permutations();
        let count = Self::patch_count(states);
        let mut rng = seed::rng_from(seed_value);
        let mut table = vec![u8::MAX; count];
        for idx in 0..count {
            let canon = Self::canonical_patch(states, &perms, idx);
            if table[canon] == u8::MAX {
                table[canon] = rng.random_range(0..states);
            }
            table[idx] = table[canon];
        }
        Ok(Ca2dRule {
            states,
            table: table.into_boxed_slice(),
        })
    }

    /// The rule as one state digit per orbit, representatives ascending.
    pub fn orbit_digits(&self) -> Vec<u8> {
        Self::orbit_representatives(self.states)
            .iter()
            .map(|&rep| self.table[rep as usize])
            .collect()
    }

    /// Rebuild a rule from per-orbit digits (inverse of
    /// [`Ca2dRule::orbit_digits`]).
    pub fn from_orbit_digits(states: u8, digits: &[u8]) -> Result<Self, CaError> {
        let reps = Self::orbit_representatives(states);
        if digits.len() != reps.len() {
            return Err(CaError::BadOrbitDigits {
                got: digits.len(),
                expected: reps.len(),
            });
        }
        let perms = d4_permutations();
        let mut by_rep = vec![0u8; Self::patch_count(states)];
        for (&rep, &digit) in reps.iter().zip(digits) {
            if digit >= states {
                return Err(CaError::BadTableEntry {
                    value: digit,
                    states,
                });
            }
            by_rep[rep as usize] = digit;
        }
        let table: Vec<u8> = (0..Self::patch_count(states))
            .map(|idx| by_rep[Self::canonical_patch(states, &perms, idx)])
            .collect();
        Ok(Ca2dRule {
            states,
            table: table.into_boxed_slice(),
        })
    }

    /// Conway's Game of Life (binary states; birth on 3 neighbors, survival
    /// on 2 or 3).
    pub fn game_of_life() -> Self {
        let table: Vec<u8> = (0..Self::patch_count(2))
            .map(|idx| {
                let center = (idx >> 4) & 1;
                let neighbors = (idx as u32).count_ones() - center as u32;
                u8::from(neighbors == 3 || (center == 1 && neighbors == 2))
            })
            .collect();
        Ca2dRule::from_table(2, table).expect("Life is square-symmetric")
    }

    pub fn states(&self) -> u8 {
        self.states
    }

    /// Next state for a 3×3 patch given as row-major cells.
    pub fn next(&self, patch: &[u8; 9]) -> u8 {
        self.table[Self::patch_index(self.states, patch)]
    }
}

/// A symmetric 2D CA on an n×n torus, one byte per cell, row-major.
#[derive(Debug, Clone)]
pub struct Ca2dSystem {
    rule: Ca2dRule,
    n: u32,
}

impl Ca2dSystem {
    pub fn new(rule: Ca2dRule, n: u32) -> Result<Self, CaError> {
        if n < 3 {
            return Err(CaError::GridTooSmall { n, radius: 1 });
        }
        Ok(Ca2dSystem { rule, n })
    }

    pub fn rule(&self) -> &Ca2dRule {
        &self.rule
    }

    pub fn side(&self) -> u32 {
        self.n
    }
}

impl System for Ca2dSystem {
    type Config = Vec<u8>;

    fn config_space_log2(&self) -> f64 {
        f64::from(self.n * self.n) * f64::from(self.rule.states).log2()
    }

    fn step(&self, config: &Vec<u8>) -> Vec<u8> {
        let mut next = vec![0u8; config.len()];
        self.step_into(config, &mut next);
        next
    }

    fn step_into(&self, src: &Vec<u8>, dst: &mut Vec<u8>) {
        let n = self.n as usize;
        dst.resize(n * n, 0);
        let q = usize::from(self.rule.states);
        let q3 = q * q * q;
        for row in 0..n {
            let up = (row + n - 1) % n * n;
            let mid = row * n;
            let down = (row + 1) % n * n;
            for col in 0..n {
                let left = (col + n - 1) % n;
                let right = (col + 1) % n;
                // Patch index digit k = cell at row-major position k.
                let idx = usize::from(src[up + left])
                    + usize::from(src[up + col]) * q
                    + usize::from(src[up + right]) * q * q
                    + (usize::from(src[mid + left])
                        + usize::from(src[mid + col]) * q
                        + usize::from(src[mid + right]) * q * q)
                        * q3
                    + (usize::from(src[down + left])
                        + usize::from(src[down + col]) * q
                        + usize::from(src[down + right]) * q * q)
                        * q3
                        * q3;
                dst[mid + col] = self.rule.table[idx];
            }
        }
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        (0..self.n * self.n)
            .map(|_| rng.random_range(0..self.rule.states))
            .collect()
    }

    fn encode(&self, config: &Vec<u8>) -> Vec<u8> {
        if self.rule.states == 2 {
            let mut out = vec![0u8; config.len().div_ceil(8)];
            for (i, &c) in config.iter().enumerate() {
                out[i / 8] |= c << (i % 8);
            }
            out
        } else {
            config.clone()
        }
    }
}

impl EnumerableSystem for Ca2dSystem {
    fn config_count(&self) -> Option<u64> {
        u64::from(self.rule.states).checked_pow(self.n * self.n)
    }

    fn config_at(&self, index: u64) -> Vec<u8> {
        let q = u64::from(self.rule.states);
        let mut rest = index;
        (0..self.n * self.n)
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
