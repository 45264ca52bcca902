//! Line-oriented rule file format for CA rules.
//!
//! The first word of the (single logical) rule line is a kind tag:
//!
//! ```text
//! eca <wolfram 0..255>
//! ca1d <states> <radius> <hex table>     # binary rules: table-as-integer hex
//! totalistic <states> <radius> <code>    # decimal totalistic code
//! ca2d <states> <hex orbit digits>       # one hex digit per symmetry orbit
//! life                                   # built-in Game of Life
//! ```
//!
//! Bit and digit ordering match [`EcaRule::from_wolfram`] and
//! [`Ca1dRule::from_totalistic_code`]: entry 0 of any table is the all-zero
//! neighborhood. Blank lines and `#` comments are ignored.

use super::{Ca1dRule, Ca2dRule, CaError, EcaRule};

/// A parsed CA rule, tagged by kind.
#[derive(Debug, Clone, PartialEq)]
pub enum CaRuleSpec {
    Eca(EcaRule),
    Ca1d(Ca1dRule),
    Ca2d(Ca2dRule),
    Life,
}

fn bad(line_no: usize, msg: impl Into<String>) -> CaError {
    CaError::Format(format!("line {line_no}: {}", msg.into()))
}

/// Parse a CA rule file.
pub fn parse_rule_file(text: &str) -> Result<CaRuleSpec, CaError> {
    let mut rule_line = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if rule_line.is_some() {
            return Err(bad(idx + 1, "unexpected extra line"));
        }
        rule_line = Some((idx + 1, line.to_string()));
    }
    let (line_no, line) = rule_line.ok_or_else(|| CaError::Format("empty rule file".into()))?;
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields[0] {
        "eca" => {
            let [_, num] = fields[..] else {
                return Err(bad(line_no, "expected: eca <number>"));
            };
            let number: u8 = num.parse().map_err(|_| {
                bad(
                    line_no,
                    format!("bad Wolfram number {num:?} (need 0..=255)"),
                )
            })?;
            Ok(CaRuleSpec::Eca(EcaRule::from_wolfram(number)))
        }
        "ca1d" => {
            let [_, states, radius, hex] = fields[..] else {
                return Err(bad(line_no, "expected: ca1d <states> <radius> <hex table>"));
            };
            let states: u8 = states
                .parse()
                .map_err(|_| bad(line_no, "bad state count"))?;
            let radius: u8 = radius.parse().map_err(|_| bad(line_no, "bad radius"))?;
            if states != 2 {
                return Err(bad(
                    line_no,
                    "ca1d hex tables are binary; use totalistic for q > 2",
                ));
            }
            Ok(CaRuleSpec::Ca1d(Ca1dRule::from_binary_hex(radius, hex)?))
        }
        "totalistic" => {
            let [_, states, radius, code] = fields[..] else {
                return Err(bad(
                    line_no,
                    "expected: totalistic <states> <radius> <code>",
                ));
            };
            let states: u8 = states
                .parse()
                .map_err(|_| bad(line_no, "bad state count"))?;
            let radius: u8 = radius.parse().map_err(|_| bad(line_no, "bad radius"))?;
            let code: u64 = code.parse().map_err(|_| bad(line_no, "bad code"))?;
            Ok(CaRuleSpec::Ca1d(Ca1dRule::from_totalistic_code(
                code, states, radius,
            )?))
        }
        "ca2d" => {
            let [_, states, digits] = fields[..] else {
                return Err(bad(line_no, "expected: ca2d <states> <hex orbit digits>"));
            };
            let states: u8 = states
                .parse()
                .map_err(|_| bad(line_no, "bad state count"))?;
            let parsed: Result<Vec<u8>, CaError> = digits
                .chars()
                .map(|ch| {
                    ch.to_digit(16)
                        .map(|d| d as u8)
                        .ok_or_else(|| bad(line_no, format!("bad hex digit {ch:?}")))
                })
                .collect();
            Ok(CaRuleSpec::Ca2d(Ca2dRule::from_orbit_digits(
                states, &parsed?,
            )?))
        }
        "life" => {
            if fields.len() != 1 {
                return Err(bad(line_no, "life takes no parameters"));
            }
            Ok(CaRuleSpec::Life)
        }
        other => Err(bad(line_no, format!("unknown rule kind {other:?}"))),
    }
}

/// Render a rule back to the file format.
pub fn render_rule_file(spec: &CaRuleSpec) -> String {
    match spec {
        CaRuleSpec::Eca(rule) => format!("eca {}\n", rule.number()),
        CaRuleSpec::Ca1d(rule) => match rule.totalistic_code() {
            Some(code) => format!("totalistic {} {} {}\n", rule.states(), rule.radius(), code),
            None => format!(
                "ca1d {} {} {}\n",
                rule.states(),
                rule.radius(),
                rule.to_binary_hex().expect("ca1d rendering is binary-only")
            ),
        },
        CaRuleSpec::Ca2d(rule) => {
            let digits: String = rule
                .orbit_digits()
                .iter()
                .map(|&d| char::from_digit(u32::from(d), 16).unwrap())
                .collect();
            format!("ca2d {} {}\n", rule.states(), digits)
        }
        CaRuleSpec::Life => "life\n".to_string(),
    }
}
