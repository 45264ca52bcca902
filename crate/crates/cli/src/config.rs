//! Experiment configuration: system spec strings, size lists, estimator
//! settings, and the key=value config file mirroring the command-line flags.

use std::path::PathBuf;
use std::time::Duration;

use transients_core::ca::{parse_rule_file, Ca1dRule, Ca2dRule, CaRuleSpec, EcaRule};
use transients_core::dynamics::Budget;
use transients_core::estimator::EstimateSettings;
use transients_core::rbn::RbnParams;
use transients_core::tm::TmRule;

use crate::CliError;

/// A fully resolved experiment configuration. Every field has a value; the
/// echo written next to the results is enough to reproduce the run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: String,
    pub sizes: Vec<u32>,
    pub epsilon: f64,
    pub batch: usize,
    pub min_samples: usize,
    pub max_samples: usize,
    pub step_cap: u64,
    pub budget_secs: f64,
    pub outer_batch: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub resume: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let settings = EstimateSettings::default();
        ExperimentConfig {
            system: String::new(),
            sizes: Vec::new(),
            epsilon: settings.epsilon,
            batch: settings.batch_size,
            min_samples: settings.min_samples,
            max_samples: settings.max_samples,
            step_cap: settings.budget.step_cap,
            budget_secs: settings.budget.wall.as_secs_f64(),
            outer_batch: 10,
            seed: 0,
            workers: 0,
            out: None,
            resume: false,
        }
    }
}

impl ExperimentConfig {
    pub fn settings(&self) -> EstimateSettings {
        EstimateSettings {
            epsilon: self.epsilon,
            batch_size: self.batch,
            min_samples: self.min_samples,
            max_samples: self.max_samples,
            budget: Budget {
                step_cap: self.step_cap,
                wall: Duration::from_secs_f64(self.budget_secs),
            },
            ..EstimateSettings::default()
        }
    }

    /// The canonical key=value echo; also the input to the experiment id.
    pub fn render(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(u32::to_string).collect();
        format!(
            "system = {}\nsizes = {}\nepsilon = {}\nbatch = {}\nmin_samples = {}\n\
             max_samples = {}\nstep_cap = {}\nbudget_secs = {}\nouter_batch = {}\nseed = {}\n",
            self.system,
            sizes.join(","),
            self.epsilon,
            self.batch,
            self.min_samples,
            self.max_samples,
            self.step_cap,
            self.budget_secs,
            self.outer_batch,
            self.seed,
        )
    }

    /// Stable experiment id: FNV-1a over the canonical echo. Workers and
    /// output location do not affect results, so they are excluded.
    pub fn experiment_id(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.render().bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }

    /// Apply `key = value` lines from a config file. Unknown keys are
    /// errors; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key = value", idx + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let context = |what: &str| {
                CliError::Config(format!("config line {}: bad {what}: {value:?}", idx + 1))
            };
            match key {
                "system" => self.system = value.to_string(),
                "sizes" => self.sizes = parse_sizes(value)?,
                "epsilon" => self.epsilon = value.parse().map_err(|_| context("epsilon"))?,
                "batch" => self.batch = value.parse().map_err(|_| context("batch"))?,
                "min_samples" => {
                    self.min_samples = value.parse().map_err(|_| context("min_samples"))?
                }
                "max_samples" => {
                    self.max_samples = value.parse().map_err(|_| context("max_samples"))?
                }
                "step_cap" => self.step_cap = value.parse().map_err(|_| context("step_cap"))?,
                "budget_secs" => {
                    self.budget_secs = value.parse().map_err(|_| context("budget_secs"))?
                }
                "outer_batch" => {
                    self.outer_batch = value.parse().map_err(|_| context("outer_batch"))?
                }
                "seed" => self.seed = value.parse().map_err(|_| context("seed"))?,
                "workers" => self.workers = value.parse().map_err(|_| context("workers"))?,
                "out" => self.out = Some(PathBuf::from(value)),
                "resume" => self.resume = value.parse().map_err(|_| context("resume"))?,
                other => {
                    return Err(CliError::Config(format!(
                        "config line {}: unknown key {other:?}",
                        idx + 1
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Parse a size list: `a..b` (inclusive), `a..b:step`, or a comma list.
pub fn parse_sizes(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Config(format!("bad size list {text:?}"));
    let text = text.trim();
    if let Some((range, step)) = text.split_once(':') {
        let step: u32 = step.trim().parse().map_err(|_| bad())?;
        if step == 0 {
            return Err(bad());
        }
        let (lo, hi) = parse_range(range).ok_or_else(bad)?;
        return Ok((lo..=hi).step_by(step as usize).collect());
    }
    if let Some((lo, hi)) = parse_range(text) {
        return Ok((lo..=hi).collect());
    }
    let sizes: Result<Vec<u32>, _> = text.split(',').map(|f| f.trim().parse()).collect();
    let sizes = sizes.map_err(|_| bad())?;
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "size list {text:?} must be strictly increasing"
        )));
    }
    Ok(sizes)
}

fn parse_range(text: &str) -> Option<(u32, u32)> {
    let (lo, hi) = text.split_once("..")?;
    let lo: u32 = lo.trim().parse().ok()?;
    let hi: u32 = hi.trim().parse().ok()?;
    (lo <= hi).then_some((lo, hi))
}

/// A parsed system family, ready to be instantiated at each size.
#[derive(Debug, Clone)]
pub enum SystemSpec {
    Eca(EcaRule),
    Ca1d(Ca1dRule),
    Ca2d(Ca2dRule),
    Tm(TmRule),
    /// Ensemble family: each size draws fresh networks.
    Rbn {
        mean_k: f64,
        bias: f64,
    },
}

impl SystemSpec {
    /// Parse a system spec string:
    ///
    /// ```text
    /// eca:<number>                      life
    /// totalistic:<code>:<q>:<r>         ca1d:2:<r>:<hex table>
    /// ca2d:<q>:seed=<s>                 tm:<states>:<symbols>:seed=<s>
    /// rbn:<mean K>:<bias p>             file:<rule file path>
    /// ```
    pub fn parse(text: &str) -> Result<SystemSpec, CliError> {
        let bad = |msg: &str| CliError::Config(format!("system spec {text:?}: {msg}"));
        let fields: Vec<&str> = text.split(':').collect();
        match fields[0] {
            "eca" => {
                let [_, num] = fields[..] else {
                    return Err(bad("expected eca:<number>"));
                };
                let number: u8 = num.parse().map_err(|_| bad("bad Wolfram number"))?;
                Ok(SystemSpec::Eca(EcaRule::from_wolfram(number)))
            }
            "life" => Ok(SystemSpec::Ca2d(Ca2dRule::game_of_life())),
            "totalistic" => {
                let [_, code, q, r] = fields[..] else {
                    return Err(bad("expected totalistic:<code>:<q>:<r>"));
                };
                let code = code.parse().map_err(|_| bad("bad code"))?;
                let q = q.parse().map_err(|_| bad("bad state count"))?;
                let r = r.parse().map_err(|_| bad("bad radius"))?;
                Ok(SystemSpec::Ca1d(
                    Ca1dRule::from_totalistic_code(code, q, r).map_err(CliError::Ca)?,
                ))
            }
            "ca1d" => {
                let [_, q, r, hex] = fields[..] else {
                    return Err(bad("expected ca1d:2:<radius>:<hex>"));
                };
                if q != "2" {
                    return Err(bad("hex tables are binary; use totalistic for q > 2"));
                }
                let r = r.parse().map_err(|_| bad("bad radius"))?;
                Ok(SystemSpec::Ca1d(
                    Ca1dRule::from_binary_hex(r, hex).map_err(CliError::Ca)?,
                ))
            }
            "ca2d" => {
                let [_, q, seed] = fields[..] else {
                    return Err(bad("expected ca2d:<q>:seed=<s>"));
                };
                let q = q.parse().map_err(|_| bad("bad state count"))?;
                let seed = seed
                    .strip_prefix("seed=")
                    .and_then(|s| s.parse::<u64>().ok())
                    .ok_or_else(|| bad("expected seed=<integer>"))?;
                Ok(SystemSpec::Ca2d(
                    Ca2dRule::sample_symmetric(q, seed).map_err(CliError::Ca)?,
                ))
            }
            "tm" => {
                let [_, states, symbols, seed] = fields[..] else {
                    return Err(bad("expected tm:<states>:<symbols>:seed=<s>"));
                };
                let states = states.parse().map_err(|_| bad("bad state count"))?;
                let symbols = symbols.parse().map_err(|_| bad("bad symbol count"))?;
                let seed = seed
                    .strip_prefix("seed=")
                    .and_then(|s| s.parse::<u64>().ok())
                    .ok_or_else(|| bad("expected seed=<integer>"))?;
                Ok(SystemSpec::Tm(
                    TmRule::sample(states, symbols, seed).map_err(CliError::Tm)?,
                ))
            }
            "rbn" => {
                let [_, k, p] = fields[..] else {
                    return Err(bad("expected rbn:<mean K>:<bias p>"));
                };
                let mean_k: f64 = k.parse().map_err(|_| bad("bad mean connectivity"))?;
                let bias: f64 = p.parse().map_err(|_| bad("bad bias"))?;
                // Validate against the smallest realizable size now.
                RbnParams::new(mean_k.ceil().max(1.0) as u32, mean_k, bias)
                    .map_err(CliError::Rbn)?;
                Ok(SystemSpec::Rbn { mean_k, bias })
            }
            "file" => {
                let path = text
                    .strip_prefix("file:")
                    .ok_or_else(|| bad("expected file:<path>"))?;
                let content = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
                SystemSpec::from_rule_file(&content)
            }
            other => Err(bad(&format!("unknown system kind {other:?}"))),
        }
    }

    /// Parse a rule file: the CA format, the `tm` machine format, or an
    /// `rbn` parameter line `rbn-params <mean K> <bias p>`.
    pub fn from_rule_file(content: &str) -> Result<SystemSpec, CliError> {
        let first_word = content
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .find(|l| !l.is_empty())
            .unwrap_or("")
            .split_whitespace()
            .next()
            .unwrap_or("");
        match first_word {
            "tm" => Ok(SystemSpec::Tm(
                transients_core::tm::parse(content).map_err(CliError::Tm)?,
            )),
            "rbn-params" => {
                let fields: Vec<&str> = content.split_whitespace().collect();
                let [_, k, p] = fields[..] else {
                    return Err(CliError::Config(
                        "expected: rbn-params <mean K> <bias p>".into(),
                    ));
                };
                let mean_k = k
                    .parse()
                    .map_err(|_| CliError::Config("bad mean connectivity".into()))?;
                let bias = p.parse().map_err(|_| CliError::Config("bad bias".into()))?;
                Ok(SystemSpec::Rbn { mean_k, bias })
            }
            _ => Ok(match parse_rule_file(content).map_err(CliError::Ca)? {
                CaRuleSpec::Eca(rule) => SystemSpec::Eca(rule),
                CaRuleSpec::Ca1d(rule) => SystemSpec::Ca1d(rule),
                CaRuleSpec::Ca2d(rule) => SystemSpec::Ca2d(rule),
                CaRuleSpec::Life => SystemSpec::Ca2d(Ca2dRule::game_of_life()),
            }),
        }
    }

    /// Short human-readable family descriptor for records and summaries.
    pub fn descriptor(&self) -> String {
        match self {
            SystemSpec::Eca(rule) => format!("eca:{}", rule.number()),
            SystemSpec::Ca1d(rule) => match rule.totalistic_code() {
                Some(code) => format!("totalistic:{}:{}:{}", code, rule.states(), rule.radius()),
                None => format!(
                    "ca1d:2:{}:{}",
                    rule.radius(),
                    rule.to_binary_hex().unwrap_or_default()
                ),
            },
            SystemSpec::Ca2d(rule) => {
                if *rule == Ca2dRule::game_of_life() {
                    "life".to_string()
                } else {
                    format!("ca2d:q{}", rule.states())
                }
            }
            SystemSpec::Tm(rule) => format!("tm:{}x{}", rule.num_states(), rule.num_symbols()),
            SystemSpec::Rbn { mean_k, bias } => format!("rbn:{mean_k}:{bias}"),
        }
    }
}
