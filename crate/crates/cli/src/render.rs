//! Space-time diagram rendering.
//!
//! Rows are sampled every `stride` steps of the trajectory, time progressing
//! downwards; row 0 is the initial configuration. 1D systems render one row
//! per sample, Turing machines render the tape contents (sampling every
//! n-th step turns the sequential head walk into a CA-like picture), and 2D
//! systems emit one frame per sampled step.

use std::fmt::Write as _;
use std::path::Path;

use transients_core::ca::{Ca1dSystem, Ca2dSystem, EcaSystem};
use transients_core::dynamics::{seeded_config, System};
use transients_core::tm::TmSystem;

use crate::config::SystemSpec;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramFormat {
    Text,
    Pgm,
}

pub struct RenderRequest {
    pub spec: SystemSpec,
    pub size: u32,
    pub rows: usize,
    pub stride: u64,
    pub seed: u64,
    pub format: DiagramFormat,
}

/// Rows of cell values plus the state count, ready for either output format.
struct Diagram {
    rows: Vec<Vec<u8>>,
    states: u8,
}

fn trajectory_rows<S: System>(
    system: &S,
    seed: u64,
    rows: usize,
    stride: u64,
    project: impl Fn(&S::Config) -> Vec<u8>,
) -> Vec<Vec<u8>> {
    let mut current = seeded_config(system, seed);
    let mut out = Vec::with_capacity(rows);
    out.push(project(&current));
    for _ in 1..rows {
        for _ in 0..stride {
            current = system.step(&current);
        }
        out.push(project(&current));
    }
    out
}

fn build_diagram(request: &RenderRequest) -> Result<Diagram, CliError> {
    let (rows, stride, seed) = (request.rows, request.stride.max(1), request.seed);
    match &request.spec {
        SystemSpec::Eca(rule) => {
            let system = EcaSystem::new(*rule, request.size)?;
            let n = request.size;
            let rows = trajectory_rows(&system, seed, rows, stride, |&config| {
                (0..n).map(|i| system.cell(config, i)).collect()
            });
            Ok(Diagram { rows, states: 2 })
        }
        SystemSpec::Ca1d(rule) => {
            let states = rule.states();
            let system = Ca1dSystem::new(rule.clone(), request.size)?;
            let rows = trajectory_rows(&system, seed, rows, stride, |config| config.clone());
            Ok(Diagram { rows, states })
        }
        SystemSpec::Ca2d(rule) => {
            let states = rule.states();
            let system = Ca2dSystem::new(rule.clone(), request.size)?;
            let rows = trajectory_rows(&system, seed, rows, stride, |config| config.clone());
            Ok(Diagram { rows, states })
        }
        SystemSpec::Tm(rule) => {
            let states = rule.num_symbols();
            let system = TmSystem::new(rule.clone(), request.size)?;
            let rows = trajectory_rows(&system, seed, rows, stride, |config| config.tape.clone());
            Ok(Diagram { rows, states })
        }
        SystemSpec::Rbn { .. } => Err(CliError::Config(
            "diagram rendering covers grid systems and machines, not network ensembles".into(),
        )),
    }
}

fn cell_char(value: u8, states: u8) -> char {
    if states == 2 {
        match value {
            0 => '.',
            _ => '#',
        }
    } else {
        char::from_digit(u32::from(value), 16).unwrap_or('?')
    }
}

fn pgm_bytes(width: usize, height: usize, cells: &[u8], states: u8) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    let scale = 255.0 / f64::from(states.max(2) - 1);
    out.extend(cells.iter().map(|&c| (f64::from(c) * scale).round() as u8));
    out
}

/// Render a diagram to `out`. For 2D systems with the PGM format, `out` is
/// a directory receiving one `step_NNNN.pgm` frame per sampled step.
pub fn run_render(request: &RenderRequest, out: &Path) -> Result<(), CliError> {
    if request.rows == 0 {
        return Err(CliError::Config("need at least one row".into()));
    }
    let diagram = build_diagram(request)?;
    let two_dimensional = matches!(request.spec, SystemSpec::Ca2d(_));
    let side = request.size as usize;

    match (request.format, two_dimensional) {
        (DiagramFormat::Text, false) => {
            let mut text = String::new();
            for row in &diagram.rows {
                for &cell in row {
                    text.push(cell_char(cell, diagram.states));
                }
                text.push('\n');
            }
            std::fs::write(out, text).map_err(|e| CliError::Io(format!("write {out:?}: {e}")))
        }
        (DiagramFormat::Text, true) => {
            let mut text = String::new();
            for (idx, frame) in diagram.rows.iter().enumerate() {
                let _ = writeln!(text, "step {}", idx as u64 * request.stride.max(1));
                for row in frame.chunks(side) {
                    for &cell in row {
                        text.push(cell_char(cell, diagram.states));
                    }
                    text.push('\n');
                }
                text.push('\n');
            }
            std::fs::write(out, text).map_err(|e| CliError::Io(format!("write {out:?}: {e}")))
        }
        (DiagramFormat::Pgm, false) => {
            let width = diagram.rows[0].len();
            let flat: Vec<u8> = diagram.rows.concat();
            let bytes = pgm_bytes(width, diagram.rows.len(), &flat, diagram.states);
            std::fs::write(out, bytes).map_err(|e| CliError::Io(format!("write {out:?}: {e}")))
        }
        (DiagramFormat::Pgm, true) => {
            std::fs::create_dir_all(out)
                .map_err(|e| CliError::Io(format!("create {out:?}: {e}")))?;
            for (idx, frame) in diagram.rows.iter().enumerate() {
                let path = out.join(format!("step_{idx:04}.pgm"));
                let bytes = pgm_bytes(side, side, frame, diagram.states);
                std::fs::write(&path, bytes)
                    .map_err(|e| CliError::Io(format!("write {path:?}: {e}")))?;
            }
            Ok(())
        }
    }
}
