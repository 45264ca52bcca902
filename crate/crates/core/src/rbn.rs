//! Random Boolean networks: N nodes, each reading K_i input nodes through its
//! own truth table, all updated synchronously.
//!
//! Generation is parameterized by the mean connectivity ⟨K⟩ and the bias p
//! (the probability that a truth-table entry is 1). The analytic boundary
//! between ordered and chaotic ensembles is ⟨K⟩ = 1 / (2p(1−p)), exposed as
//! [`critical_k`].
//!
//! Fixture file format (see [`parse`]): header `rbn <N>`, then one line per
//! node: `<k> <input...> <hex table>`, where bit e of the hex value is the
//! table entry for input pattern e.

use rand::Rng;

use crate::dynamics::{EnumerableSystem, System};
use crate::seed;

use thiserror::Error;

/// Largest per-node input count the truth-table representation accepts.
const MAX_NODE_INPUTS: u32 = 20;

#[derive(Debug, Error, PartialEq)]
pub enum RbnError {
    #[error("bias {bias} out of range (need 0 < p < 1)")]
    BiasOutOfRange { bias: f64 },
    #[error("mean connectivity {mean_k} not realizable on {n_nodes} nodes")]
    UnrealizableConnectivity { mean_k: f64, n_nodes: u32 },
    #[error("need at least one node")]
    Empty,
    #[error("node {node}: {message}")]
    BadNode { node: usize, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Ensemble parameters: node count, mean connectivity, table bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbnParams {
    pub n_nodes: u32,
    pub mean_k: f64,
    pub bias: f64,
}

impl RbnParams {
    pub fn new(n_nodes: u32, mean_k: f64, bias: f64) -> Result<Self, RbnError> {
        let params = RbnParams {
            n_nodes,
            mean_k,
            bias,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), RbnError> {
        if self.n_nodes == 0 {
            return Err(RbnError::Empty);
        }
        if !(self.bias > 0.0 && self.bias < 1.0) {
            return Err(RbnError::BiasOutOfRange { bias: self.bias });
        }
        let ceil = self.mean_k.ceil();
        if !(self.mean_k > 0.0)
            || ceil > f64::from(self.n_nodes)
            || ceil > f64::from(MAX_NODE_INPUTS)
        {
            return Err(RbnError::UnrealizableConnectivity {
                mean_k: self.mean_k,
                n_nodes: self.n_nodes,
            });
        }
        Ok(())
    }
}

/// The critical mean connectivity 1 / (2p(1−p)) for bias p.
pub fn critical_k(bias: f64) -> Result<f64, RbnError> {
    if !(bias > 0.0 && bias < 1.0) {
        return Err(RbnError::BiasOutOfRange { bias });
    }
    Ok(1.0 / (2.0 * bias * (1.0 - bias)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RbnNode {
    inputs: Vec<u32>,
    /// 2^inputs.len() entries of 0/1.
    table: Vec<u8>,
}

/// A concrete network: per-node input lists and truth tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RbnNetwork {
    nodes: Vec<RbnNode>,
}

impl RbnNetwork {
    pub fn n_nodes(&self) -> u32 {
        self.nodes.len() as u32
    }

    /// Input nodes of node `i`, in table-index order (bit j of the table
    /// index is the value of input j).
    pub fn inputs(&self, i: usize) -> &[u32] {
        &self.nodes[i].inputs
    }

    /// Realized mean connectivity.
    pub fn mean_connectivity(&self) -> f64 {
        let total: usize = self.nodes.iter().map(|n| n.inputs.len()).sum();
        total as f64 / self.nodes.len() as f64
    }

    /// Fraction of truth-table entries equal to 1.
    pub fn table_bit_fraction(&self) -> f64 {
        let (ones, total) = self.nodes.iter().fold((0usize, 0usize), |(o, t), n| {
            (
                o + n.table.iter().filter(|&&b| b == 1).count(),
                t + n.table.len(),
            )
        });
        ones as f64 / total as f64
    }

    /// Build a network explicitly; used for fixtures and tests.
    pub fn from_nodes(nodes: Vec<(Vec<u32>, Vec<u8>)>) -> Result<Self, RbnError> {
        if nodes.is_empty() {
            return Err(RbnError::Empty);
        }
        let n = nodes.len();
        let built: Result<Vec<RbnNode>, RbnError> = nodes
            .into_iter()
            .enumerate()
            .map(|(i, (inputs, table))| {
                if inputs.len() > MAX_NODE_INPUTS as usize {
                    return Err(RbnError::BadNode {
                        node: i,
                        message: format!("{} inputs exceeds {MAX_NODE_INPUTS}", inputs.len()),
                    });
                }
                if let Some(&bad) = inputs.iter().find(|&&j| j as usize >= n) {
                    return Err(RbnError::BadNode {
                        node: i,
                        message: format!("input {bad} out of range"),
                    });
                }
                if table.len() != 1 << inputs.len() {
                    return Err(RbnError::BadNode {
                        node: i,
                        message: format!(
                            "table has {} entries, expected {}",
                            table.len(),
                            1usize << inputs.len()
                        ),
                    });
                }
                if table.iter().any(|&b| b > 1) {
                    return Err(RbnError::BadNode {
                        node: i,
                        message: "table entries must be 0 or 1".into(),
                    });
                }
                Ok(RbnNode { inputs, table })
            })
            .collect();
        Ok(RbnNetwork { nodes: built? })
    }
}

/// Generate a network: node i draws K_i = ⌊⟨K⟩⌋ or ⌈⟨K⟩⌉ (Bernoulli on the
/// fractional part), its inputs uniformly among all K_i-subsets of nodes
/// (self-inputs allowed, no repetition), and each table bit i.i.d. with
/// bias p. Deterministic per seed.
pub fn generate(params: &RbnParams, seed_value: u64) -> Result<RbnNetwork, RbnError> {
    params.validate()?;
    let mut rng = seed::rng_from(seed_value);
    let n = params.n_nodes as usize;
    let floor = params.mean_k.floor();
    let frac = params.mean_k - floor;
    let nodes = (0..n)
        .map(|_| {
            let k = floor as usize + usize::from(frac > 0.0 && rng.random_bool(frac));
            let inputs: Vec<u32> = rand::seq::index::sample(&mut rng, n, k)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            let table = (0..1usize << k)
                .map(|_| u8::from(rng.random_bool(params.bias)))
                .collect();
            RbnNode { inputs, table }
        })
        .collect();
    Ok(RbnNetwork { nodes })
}

/// Node values packed one bit per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeStates {
    words: Vec<u64>,
}

impl NodeStates {
    fn zero(n: usize) -> Self {
        NodeStates {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn get(&self, i: usize) -> u8 {
        ((self.words[i / 64] >> (i % 64)) & 1) as u8
    }

    pub fn set(&mut self, i: usize, value: u8) {
        let mask = 1u64 << (i % 64);
        if value != 0 {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Build from explicit bits; used by fixtures.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut s = NodeStates::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }
}

/// A generated network as a dynamical system on {0,1}^N.
#[derive(Debug, Clone)]
pub struct RbnSystem {
    network: RbnNetwork,
}

impl RbnSystem {
    pub fn new(network: RbnNetwork) -> Self {
        RbnSystem { network }
    }

    pub fn network(&self) -> &RbnNetwork {
        &self.network
    }

    fn n(&self) -> usize {
        self.network.nodes.len()
    }
}

impl System for RbnSystem {
    type Config = NodeStates;

    fn config_space_log2(&self) -> f64 {
        self.n() as f64
    }

    fn step(&self, config: &NodeStates) -> NodeStates {
        let mut next = NodeStates::zero(self.n());
        self.step_into(config, &mut next);
        next
    }

    fn step_into(&self, src: &NodeStates, dst: &mut NodeStates) {
        dst.words.clear();
        dst.words.resize(self.n().div_ceil(64), 0);
        for (i, node) in self.network.nodes.iter().enumerate() {
            let mut idx = 0usize;
            for (j, &input) in node.inputs.iter().enumerate() {
                idx |= usize::from(src.get(input as usize)) << j;
            }
            if node.table[idx] != 0 {
                dst.words[i / 64] |= 1u64 << (i % 64);
            }
        }
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeStates {
        let n = self.n();
        let mut words: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.random()).collect();
        let tail = n % 64;
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        NodeStates { words }
    }

    fn encode(&self, config: &NodeStates) -> Vec<u8> {
        let bytes = self.n().div_ceil(8);
        config
            .words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(bytes)
            .collect()
    }
}

impl EnumerableSystem for RbnSystem {
    fn config_count(&self) -> Option<u64> {
        1u64.checked_shl(self.n() as u32)
    }

    fn config_at(&self, index: u64) -> NodeStates {
        let mut s = NodeStates::zero(self.n());
        s.words[0] = index;
        s
    }

    fn index_of(&self, config: &NodeStates) -> u64 {
        config.words[0]
    }
}

/// Parse the fixture file format.
pub fn parse(text: &str) -> Result<RbnNetwork, RbnError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty());
    let (header_line, header) = lines.next().ok_or(RbnError::Parse {
        line: 1,
        message: "empty network file".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [tag, n] = fields[..] else {
        return Err(RbnError::Parse {
            line: header_line,
            message: "expected header: rbn <N>".into(),
        });
    };
    if tag != "rbn" {
        return Err(RbnError::Parse {
            line: header_line,
            message: format!("expected tag \"rbn\", got {tag:?}"),
        });
    }
    let n: usize = n.parse().map_err(|_| RbnError::Parse {
        line: header_line,
        message: format!("bad node count {n:?}"),
    })?;

    let mut nodes = Vec::with_capacity(n);
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(RbnError::Parse {
                line: line_no,
                message: "expected: <k> <input...> <hex table>".into(),
            });
        }
        let k: usize = fields[0].parse().map_err(|_| RbnError::Parse {
            line: line_no,
            message: format!("bad input count {:?}", fields[0]),
        })?;
        if fields.len() != k + 2 {
            return Err(RbnError::Parse {
                line: line_no,
                message: format!(
                    "expected {k} inputs and a table, got {} fields",
                    fields.len() - 1
                ),
            });
        }
        let inputs: Result<Vec<u32>, RbnError> = fields[1..1 + k]
            .iter()
            .map(|f| {
                f.parse().map_err(|_| RbnError::Parse {
                    line: line_no,
                    message: format!("bad input index {f:?}"),
                })
            })
            .collect();
        let hex = fields[k + 1];
        let entries = 1usize << k;
        let mut table = vec![0u8; entries];
        for (pos, ch) in hex.chars().rev().enumerate() {
            let value = ch.to_digit(16).ok_or(RbnError::Parse {
                line: line_no,
                message: format!("bad hex digit {ch:?}"),
            })?;
            for bit in 0..4 {
                let e = pos * 4 + bit;
                if e < entries {
                    table[e] = ((value >> bit) & 1) as u8;
                } else if (value >> bit) & 1 != 0 {
                    return Err(RbnError::Parse {
                        line: line_no,
                        message: format!("table bit {e} beyond 2^{k} entries"),
                    });
                }
            }
        }
        nodes.push((inputs?, table));
    }
    if nodes.len() != n {
        return Err(RbnError::Parse {
            line: 0,
            message: format!("header says {n} nodes, found {}", nodes.len()),
        });
    }
    RbnNetwork::from_nodes(nodes)
}

/// Render a network in the fixture format.
pub fn render(network: &RbnNetwork) -> String {
    let mut out = format!("rbn {}\n", network.n_nodes());
    for node in &network.nodes {
        out.push_str(&format!("{}", node.inputs.len()));
        for &i in &node.inputs {
            out.push_str(&format!(" {i}"));
        }
        let digits = node.table.len().div_ceil(4);
        out.push(' ');
        for d in (0..digits).rev() {
            let mut value = 0u32;
            for bit in 0..4 {
                let e = d * 4 + bit;
                if e < node.table.len() {
                    value |= u32::from(node.table[e]) << bit;
                }
            }
            out.push(char::from_digit(value, 16).unwrap());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{enumerate_phase_space, measure_trajectory, Budget, TrajectoryResult};

    #[test]
    fn critical_k_values() {
        assert!((critical_k(0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((critical_k(0.7).unwrap() - 2.381).abs() < 5e-4);
        assert!((critical_k(0.9).unwrap() - 5.5556).abs() < 5e-4);
        assert!(critical_k(0.0).is_err());
        assert!(critical_k(1.0).is_err());
    }

    /// Two nodes reading each other through identity tables: two fixed
    /// points and one 2-cycle, all transients 0.
    #[test]
    fn two_node_exchange_fixture() {
        let network =
            RbnNetwork::from_nodes(vec![(vec![1], vec![0, 1]), (vec![0], vec![0, 1])]).unwrap();
        let sys = RbnSystem::new(network);
        let expected = [(0b00u64, 0, 1), (0b01, 0, 2), (0b10, 0, 2), (0b11, 0, 1)];
        for (index, transient, period) in expected {
            assert_eq!(
                measure_trajectory(&sys, &sys.config_at(index), &Budget::default()),
                TrajectoryResult::Completed { transient, period },
                "state {index:02b}"
            );
        }
        // Hand-simulated map: 01 -> 10 -> 01.
        assert_eq!(sys.step(&sys.config_at(0b01)), sys.config_at(0b10));
        let all = enumerate_phase_space(&sys).unwrap();
        assert_eq!(all.len(), 4);
    }

    #[test]
    fn single_node_self_not_oscillates() {
        let network = RbnNetwork::from_nodes(vec![(vec![0], vec![1, 0])]).unwrap();
        let sys = RbnSystem::new(network);
        for index in 0..2u64 {
            assert_eq!(
                measure_trajectory(&sys, &sys.config_at(index), &Budget::default()),
                TrajectoryResult::Completed {
                    transient: 0,
                    period: 2
                }
            );
        }
    }

    #[test]
    fn constant_zero_tables_reach_zero_in_one_step() {
        let params = RbnParams::new(10, 2.0, 0.5).unwrap();
        let mut network = generate(&params, 4).unwrap();
        for node in &mut network.nodes {
            node.table.iter_mut().for_each(|b| *b = 0);
        }
        let sys = RbnSystem::new(network);
        for index in [1u64, 5, 512, 1023] {
            let res = measure_trajectory(&sys, &sys.config_at(index), &Budget::default());
            assert_eq!(
                res,
                TrajectoryResult::Completed {
                    transient: 1,
                    period: 1
                }
            );
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let params = RbnParams::new(30, 2.381, 0.7).unwrap();
        assert_eq!(generate(&params, 9).unwrap(), generate(&params, 9).unwrap());
        assert_ne!(
            generate(&params, 9).unwrap(),
            generate(&params, 10).unwrap()
        );
    }

    #[test]
    fn inputs_are_distinct_and_in_range() {
        let params = RbnParams::new(12, 3.6, 0.4).unwrap();
        for seed_value in 0..20u64 {
            let network = generate(&params, seed_value).unwrap();
            for i in 0..12 {
                let inputs = network.inputs(i);
                let mut sorted = inputs.to_vec();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), inputs.len(), "repeated input on node {i}");
                assert!(inputs.iter().all(|&j| j < 12));
            }
        }
    }

    #[test]
    fn realized_bias_matches_parameter() {
        // ~1.3e5 table bits; a 1% tolerance is > 6 sigma.
        let params = RbnParams::new(1000, 5.0, 0.7).unwrap();
        let mut ones = 0usize;
        let mut total = 0usize;
        for seed_value in 0..4u64 {
            let network = generate(&params, seed_value).unwrap();
            for node in &network.nodes {
                ones += node.table.iter().filter(|&&b| b == 1).count();
                total += node.table.len();
            }
        }
        let freq = ones as f64 / total as f64;
        assert!(total > 100_000);
        assert!((freq - 0.7).abs() < 0.01, "bias realized at {freq}");
    }

    #[test]
    fn realized_mean_connectivity_matches_parameter() {
        // 10^4 nodes; tolerance 0.02 is > 4 sigma on the Bernoulli rounding.
        let params = RbnParams::new(10_000, 2.381, 0.7).unwrap();
        let network = generate(&params, 1).unwrap();
        assert!((network.mean_connectivity() - 2.381).abs() < 0.02);
    }

    #[test]
    fn flipping_non_input_does_not_change_node() {
        let params = RbnParams::new(15, 2.0, 0.5).unwrap();
        let network = generate(&params, 77).unwrap();
        let sys = RbnSystem::new(network.clone());
        let mut rng = crate::seed::rng_from(3);
        for _ in 0..100 {
            let config = sys.sample_uniform(&mut rng);
            let base = sys.step(&config);
            for node in 0..15usize {
                for other in 0..15usize {
                    if network.inputs(node).contains(&(other as u32)) {
                        continue;
                    }
                    let mut flipped = config.clone();
                    flipped.set(other, 1 - flipped.get(other));
                    assert_eq!(sys.step(&flipped).get(node), base.get(node));
                }
            }
        }
    }

    #[test]
    fn unrealizable_params_are_rejected() {
        assert!(matches!(
            RbnParams::new(3, 5.0, 0.5),
            Err(RbnError::UnrealizableConnectivity { .. })
        ));
        assert!(matches!(
            RbnParams::new(3, 2.0, 1.0),
            Err(RbnError::BiasOutOfRange { .. })
        ));
    }

    #[test]
    fn file_format_round_trips() {
        let params = RbnParams::new(9, 2.5, 0.3).unwrap();
        let network = generate(&params, 21).unwrap();
        let text = render(&network);
        assert_eq!(parse(&text).unwrap(), network);
    }

    #[test]
    fn parse_reports_bad_lines() {
        assert!(matches!(
            parse("rbn 1\n2 0 1\n"),
            Err(RbnError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse(""), Err(RbnError::Parse { .. })));
    }
}
