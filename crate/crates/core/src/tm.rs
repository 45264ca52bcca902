//! Deterministic single-tape Turing machines on a cyclic tape.
//!
//! The transition table is total — there is no distinguished halting state.
//! A machine "halts" exactly when its trajectory enters an attractor, which
//! the generic cycle detector recognizes; classically halting machines can be
//! encoded by giving the halt state a self-loop that rewrites the read symbol
//! and stays put, turning it into a fixed point.
//!
//! File format (see [`parse`]):
//!
//! ```text
//! tm <num_states> <num_symbols>
//! <state> <symbol> -> <state'> <symbol'> <L|R|N>
//! ```
//!
//! one line per (state, symbol) pair, `N` meaning "stay".

use rand::Rng;

use crate::dynamics::{EnumerableSystem, System};
use crate::seed;

use thiserror::Error;

/// Head movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmMove {
    Left,
    Right,
    Stay,
}

impl TmMove {
    fn letter(self) -> char {
        match self {
            TmMove::Left => 'L',
            TmMove::Right => 'R',
            TmMove::Stay => 'N',
        }
    }
}

/// One transition: next state, written symbol, head movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TmTransition {
    pub state: u8,
    pub write: u8,
    pub movement: TmMove,
}

/// A total deterministic transition table over `num_states` states and
/// `num_symbols` tape symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmRule {
    num_states: u8,
    num_symbols: u8,
    delta: Box<[TmTransition]>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TmError {
    #[error("need at least 1 state and 2 symbols, got {states} states, {symbols} symbols")]
    BadShape { states: u8, symbols: u8 },
    #[error("transition table has {got} entries, expected {expected}")]
    BadTableLength { got: usize, expected: usize },
    #[error("transition ({state}, {symbol}) targets out-of-range state or symbol")]
    BadTransition { state: u8, symbol: u8 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing transition for state {state}, symbol {symbol}")]
    MissingEntry { state: u8, symbol: u8 },
    #[error("line {line}: duplicate transition for state {state}, symbol {symbol}")]
    DuplicateEntry { line: usize, state: u8, symbol: u8 },
}

impl TmRule {
    /// Build a rule from transitions listed in (state, symbol) order.
    pub fn new(num_states: u8, num_symbols: u8, delta: Vec<TmTransition>) -> Result<Self, TmError> {
        if num_states < 1 || num_symbols < 2 {
            return Err(TmError::BadShape {
                states: num_states,
                symbols: num_symbols,
            });
        }
        let expected = usize::from(num_states) * usize::from(num_symbols);
        if delta.len() != expected {
            return Err(TmError::BadTableLength {
                got: delta.len(),
                expected,
            });
        }
        for (i, t) in delta.iter().enumerate() {
            if t.state >= num_states || t.write >= num_symbols {
                return Err(TmError::BadTransition {
                    state: (i / usize::from(num_symbols)) as u8,
                    symbol: (i % usize::from(num_symbols)) as u8,
                });
            }
        }
        Ok(TmRule {
            num_states,
            num_symbols,
            delta: delta.into_boxed_slice(),
        })
    }

    /// Draw every transition independently and uniformly. Deterministic per
    /// seed.
    pub fn sample(num_states: u8, num_symbols: u8, seed_value: u64) -> Result<Self, TmError> {
        if num_states < 1 || num_symbols < 2 {
            return Err(TmError::BadShape {
                states: num_states,
                symbols: num_symbols,
            });
        }
        let mut rng = seed::rng_from(seed_value);
        let delta = (0..usize::from(num_states) * usize::from(num_symbols))
            .map(|_| TmTransition {
                state: rng.random_range(0..num_states),
                write: rng.random_range(0..num_symbols),
                movement: match rng.random_range(0..3u8) {
                    0 => TmMove::Left,
                    1 => TmMove::Right,
                    _ => TmMove::Stay,
                },
            })
            .collect();
        TmRule::new(num_states, num_symbols, delta)
    }

    pub fn num_states(&self) -> u8 {
        self.num_states
    }

    pub fn num_symbols(&self) -> u8 {
        self.num_symbols
    }

    pub fn transition(&self, state: u8, symbol: u8) -> TmTransition {
        self.delta[usize::from(state) * usize::from(self.num_symbols) + usize::from(symbol)]
    }
}

/// A full machine configuration: cyclic tape, head position, internal state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TmConfig {
    pub tape: Vec<u8>,
    pub head: u32,
    pub state: u8,
}

/// A Turing machine as a dynamical system on tapes of fixed length `n`:
/// the configuration space is every (tape, head, state) triple.
#[derive(Debug, Clone)]
pub struct TmSystem {
    rule: TmRule,
    n: u32,
}

impl TmSystem {
    pub fn new(rule: TmRule, n: u32) -> Result<Self, TmError> {
        if n < 1 {
            return Err(TmError::BadShape {
                states: rule.num_states,
                symbols: rule.num_symbols,
            });
        }
        Ok(TmSystem { rule, n })
    }

    pub fn rule(&self) -> &TmRule {
        &self.rule
    }

    pub fn tape_len(&self) -> u32 {
        self.n
    }

    fn apply(&self, config: &mut TmConfig) {
        let t = self
            .rule
            .transition(config.state, config.tape[config.head as usize]);
        config.tape[config.head as usize] = t.write;
        config.state = t.state;
        config.head = match t.movement {
            TmMove::Left => (config.head + self.n - 1) % self.n,
            TmMove::Right => (config.head + 1) % self.n,
            TmMove::Stay => config.head,
        };
    }
}

impl System for TmSystem {
    type Config = TmConfig;

    fn config_space_log2(&self) -> f64 {
        f64::from(self.n) * f64::from(self.rule.num_symbols).log2()
            + f64::from(self.n).log2()
            + f64::from(self.rule.num_states).log2()
    }

    fn step(&self, config: &TmConfig) -> TmConfig {
        let mut next = config.clone();
        self.apply(&mut next);
        next
    }

    fn step_into(&self, src: &TmConfig, dst: &mut TmConfig) {
        dst.clone_from(src);
        self.apply(dst);
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> TmConfig {
        TmConfig {
            tape: (0..self.n)
                .map(|_| rng.random_range(0..self.rule.num_symbols))
                .collect(),
            head: rng.random_range(0..self.n),
            state: rng.random_range(0..self.rule.num_states),
        }
    }

    fn encode(&self, config: &TmConfig) -> Vec<u8> {
        let mut out = Vec::with_capacity(config.tape.len() + 5);
        out.extend_from_slice(&config.tape);
        out.extend_from_slice(&config.head.to_le_bytes());
        out.push(config.state);
        out
    }
}

impl EnumerableSystem for TmSystem {
    fn config_count(&self) -> Option<u64> {
        u64::from(self.rule.num_symbols)
            .checked_pow(self.n)?
            .checked_mul(u64::from(self.n))?
            .checked_mul(u64::from(self.rule.num_states))
    }

    fn config_at(&self, index: u64) -> TmConfig {
        let states = u64::from(self.rule.num_states);
        let symbols = u64::from(self.rule.num_symbols);
        let state = (index % states) as u8;
        let rest = index / states;
        let head = (rest % u64::from(self.n)) as u32;
        let mut tape_index = rest / u64::from(self.n);
        let tape = (0..self.n)
            .map(|_| {
                let c = (tape_index % symbols) as u8;
                tape_index /= symbols;
                c
            })
            .collect();
        TmConfig { tape, head, state }
    }

    fn index_of(&self, config: &TmConfig) -> u64 {
        let states = u64::from(self.rule.num_states);
        let symbols = u64::from(self.rule.num_symbols);
        let tape_index = config
            .tape
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * symbols + u64::from(c));
        (tape_index * u64::from(self.n) + u64::from(config.head)) * states + u64::from(config.state)
    }
}

/// Parse the machine file format. Errors carry line numbers; a missing or
/// duplicated (state, symbol) entry is rejected.
pub fn parse(text: &str) -> Result<TmRule, TmError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty());

    let (header_line, header) = lines.next().ok_or(TmError::Parse {
        line: 1,
        message: "empty machine file".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [tag, states, symbols] = fields[..] else {
        return Err(TmError::Parse {
            line: header_line,
            message: "expected header: tm <num_states> <num_symbols>".into(),
        });
    };
    if tag != "tm" {
        return Err(TmError::Parse {
            line: header_line,
            message: format!("expected tag \"tm\", got {tag:?}"),
        });
    }
    let parse_u8 = |line: usize, text: &str, what: &str| -> Result<u8, TmError> {
        text.parse().map_err(|_| TmError::Parse {
            line,
            message: format!("bad {what}: {text:?}"),
        })
    };
    let num_states = parse_u8(header_line, states, "state count")?;
    let num_symbols = parse_u8(header_line, symbols, "symbol count")?;
    if num_states < 1 || num_symbols < 2 {
        return Err(TmError::BadShape {
            states: num_states,
            symbols: num_symbols,
        });
    }

    let mut delta: Vec<Option<TmTransition>> =
        vec![None; usize::from(num_states) * usize::from(num_symbols)];
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [s, a, arrow, s2, a2, m] = fields[..] else {
            return Err(TmError::Parse {
                line: line_no,
                message: "expected: <state> <symbol> -> <state'> <symbol'> <L|R|N>".into(),
            });
        };
        if arrow != "->" {
            return Err(TmError::Parse {
                line: line_no,
                message: format!("expected \"->\", got {arrow:?}"),
            });
        }
        let state = parse_u8(line_no, s, "state")?;
        let symbol = parse_u8(line_no, a, "symbol")?;
        if state >= num_states || symbol >= num_symbols {
            return Err(TmError::Parse {
                line: line_no,
                message: format!("state {state} or symbol {symbol} out of range"),
            });
        }
        let movement = match m {
            "L" => TmMove::Left,
            "R" => TmMove::Right,
            "N" => TmMove::Stay,
            other => {
                return Err(TmError::Parse {
                    line: line_no,
                    message: format!("bad movement {other:?} (need L, R or N)"),
                })
            }
        };
        let transition = TmTransition {
            state: parse_u8(line_no, s2, "target state")?,
            write: parse_u8(line_no, a2, "written symbol")?,
            movement,
        };
        if transition.state >= num_states || transition.write >= num_symbols {
            return Err(TmError::Parse {
                line: line_no,
                message: format!("transition target out of range on ({state}, {symbol})"),
            });
        }
        let slot = &mut delta[usize::from(state) * usize::from(num_symbols) + usize::from(symbol)];
        if slot.is_some() {
            return Err(TmError::DuplicateEntry {
                line: line_no,
                state,
                symbol,
            });
        }
        *slot = Some(transition);
    }

    let mut table = Vec::with_capacity(delta.len());
    for (i, entry) in delta.into_iter().enumerate() {
        match entry {
            Some(t) => table.push(t),
            None => {
                return Err(TmError::MissingEntry {
                    state: (i / usize::from(num_symbols)) as u8,
                    symbol: (i % usize::from(num_symbols)) as u8,
                })
            }
        }
    }
    TmRule::new(num_states, num_symbols, table)
}

/// Render a rule in the file format, entries in (state, symbol) order.
pub fn render(rule: &TmRule) -> String {
    let mut out = format!("tm {} {}\n", rule.num_states, rule.num_symbols);
    for state in 0..rule.num_states {
        for symbol in 0..rule.num_symbols {
            let t = rule.transition(state, symbol);
            out.push_str(&format!(
                "{state} {symbol} -> {} {} {}\n",
                t.state,
                t.write,
                t.movement.letter()
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{measure_trajectory, Budget, TrajectoryResult};

    /// Writes back the read symbol, stays, keeps its state.
    fn identity_rule(states: u8, symbols: u8) -> TmRule {
        let delta = (0..states)
            .flat_map(|s| {
                (0..symbols).map(move |a| TmTransition {
                    state: s,
                    write: a,
                    movement: TmMove::Stay,
                })
            })
            .collect();
        TmRule::new(states, symbols, delta).unwrap()
    }

    /// Single state, always writes 0 and moves right.
    fn zeroing_sweeper() -> TmRule {
        TmRule::new(
            1,
            2,
            vec![
                TmTransition {
                    state: 0,
                    write: 0,
                    movement: TmMove::Right,
                },
                TmTransition {
                    state: 0,
                    write: 0,
                    movement: TmMove::Right,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_rule_fixes_every_config() {
        let sys = TmSystem::new(identity_rule(2, 2), 4).unwrap();
        let count = sys.config_count().unwrap();
        for i in 0..count {
            let config = sys.config_at(i);
            assert_eq!(sys.step(&config), config);
            assert_eq!(
                measure_trajectory(&sys, &config, &Budget::default()),
                TrajectoryResult::Completed {
                    transient: 0,
                    period: 1
                }
            );
        }
    }

    #[test]
    fn config_count_formula() {
        let sys = TmSystem::new(identity_rule(2, 2), 3).unwrap();
        assert_eq!(sys.config_count(), Some(48)); // 2^3 * 3 * 2
    }

    #[test]
    fn sweeper_reaches_rotating_zero_cycle() {
        let sys = TmSystem::new(zeroing_sweeper(), 5).unwrap();
        let count = sys.config_count().unwrap();
        for i in 0..count {
            let config = sys.config_at(i);
            let res = measure_trajectory(&sys, &config, &Budget::default());
            let TrajectoryResult::Completed { transient, period } = res else {
                panic!("budget exhausted on a 160-config space");
            };
            assert!(transient <= 5, "transient {transient} exceeds tape length");
            assert_eq!(5 % period, 0, "period {period} must divide tape length");
        }
    }

    #[test]
    fn step_changes_at_most_one_cell_and_moves_head_one() {
        let rule = TmRule::sample(5, 3, 17).unwrap();
        let sys = TmSystem::new(rule, 9).unwrap();
        let mut rng = crate::seed::rng_from(3);
        for _ in 0..200 {
            let config = sys.sample_uniform(&mut rng);
            let next = sys.step(&config);
            let changed = config
                .tape
                .iter()
                .zip(&next.tape)
                .filter(|(a, b)| a != b)
                .count();
            assert!(changed <= 1);
            let dist = (config.head as i64 - next.head as i64).rem_euclid(9);
            assert!(dist == 0 || dist == 1 || dist == 8);
        }
    }

    #[test]
    fn rotating_tape_and_head_commutes_with_step() {
        let rule = TmRule::sample(4, 3, 29).unwrap();
        let sys = TmSystem::new(rule, 7).unwrap();
        let rot = |c: &TmConfig| -> TmConfig {
            let n = c.tape.len();
            let mut tape = vec![0u8; n];
            for (i, &v) in c.tape.iter().enumerate() {
                tape[(i + 1) % n] = v;
            }
            TmConfig {
                tape,
                head: (c.head + 1) % n as u32,
                state: c.state,
            }
        };
        let mut rng = crate::seed::rng_from(31);
        for _ in 0..100 {
            let config = sys.sample_uniform(&mut rng);
            assert_eq!(sys.step(&rot(&config)), rot(&sys.step(&config)));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_total() {
        let a = TmRule::sample(7, 4, 99).unwrap();
        let b = TmRule::sample(7, 4, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.delta.len(), 28);
    }

    #[test]
    fn sampled_moves_are_roughly_uniform() {
        let mut counts = [0u32; 3];
        for seed_value in 0..120u64 {
            let rule = TmRule::sample(7, 4, seed_value).unwrap();
            for s in 0..7 {
                for a in 0..4 {
                    match rule.transition(s, a).movement {
                        TmMove::Left => counts[0] += 1,
                        TmMove::Right => counts[1] += 1,
                        TmMove::Stay => counts[2] += 1,
                    }
                }
            }
        }
        let total: u32 = counts.iter().sum();
        assert_eq!(total, 3360);
        for c in counts {
            let freq = f64::from(c) / f64::from(total);
            assert!((freq - 1.0 / 3.0).abs() < 0.02, "move frequency {freq}");
        }
    }

    #[test]
    fn head_histogram_is_uniform() {
        let sys = TmSystem::new(identity_rule(3, 2), 20).unwrap();
        let mut rng = crate::seed::rng_from(8);
        let mut counts = vec![0u32; 20];
        let draws = 10_000;
        for _ in 0..draws {
            counts[sys.sample_uniform(&mut rng).head as usize] += 1;
        }
        let expected = draws as f64 / 20.0;
        let sigma = (draws as f64 * (1.0 / 20.0) * (19.0 / 20.0)).sqrt();
        for &c in &counts {
            assert!((f64::from(c) - expected).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn one_cell_tape_keeps_head_at_zero() {
        let sys = TmSystem::new(identity_rule(2, 2), 1).unwrap();
        let mut rng = crate::seed::rng_from(1);
        for _ in 0..20 {
            assert_eq!(sys.sample_uniform(&mut rng).head, 0);
        }
    }

    #[test]
    fn index_round_trips() {
        let sys = TmSystem::new(TmRule::sample(3, 3, 5).unwrap(), 4).unwrap();
        let count = sys.config_count().unwrap();
        for i in 0..count {
            assert_eq!(sys.index_of(&sys.config_at(i)), i);
        }
    }

    #[test]
    fn parse_well_formed_machine() {
        let text = "tm 2 2\n0 0 -> 1 1 R\n0 1 -> 0 0 L\n1 0 -> 1 0 N\n1 1 -> 0 1 R\n";
        let rule = parse(text).unwrap();
        assert_eq!(rule.num_states(), 2);
        assert_eq!(
            rule.transition(0, 0),
            TmTransition {
                state: 1,
                write: 1,
                movement: TmMove::Right
            }
        );
    }

    #[test]
    fn parse_rejects_missing_entry() {
        let text = "tm 2 2\n0 0 -> 1 1 R\n0 1 -> 0 0 L\n1 0 -> 1 0 N\n";
        assert_eq!(
            parse(text),
            Err(TmError::MissingEntry {
                state: 1,
                symbol: 1
            })
        );
    }

    #[test]
    fn parse_rejects_duplicates_with_line() {
        let text = "tm 1 2\n0 0 -> 0 1 R\n0 0 -> 0 0 L\n0 1 -> 0 0 N\n";
        assert_eq!(
            parse(text),
            Err(TmError::DuplicateEntry {
                line: 3,
                state: 0,
                symbol: 0,
            })
        );
    }

    #[test]
    fn render_parse_round_trip() {
        for seed_value in 0..30u64 {
            let rule = TmRule::sample(6, 3, seed_value).unwrap();
            let text = render(&rule);
            assert_eq!(parse(&text).unwrap(), rule);
            assert_eq!(render(&parse(&text).unwrap()), text);
        }
    }
}
