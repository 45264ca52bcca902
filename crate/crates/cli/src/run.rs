//! Experiment orchestration: the size loop with persistence and resume, the
//! ensemble scans, and the 88-rule elementary-CA atlas.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use transients_core::ca::{
    canonical_representatives, Ca1dRule, Ca1dSystem, Ca2dRule, Ca2dSystem, EcaRule, EcaSystem,
};
use transients_core::classifier::{classify, Classification, Label};
use transients_core::estimator::{
    estimate_average_transient, estimate_ensemble_average, size_seed, EstimateStatus,
    TransientEstimate, SERIES_STOP_AFTER_LIMITED,
};
use transients_core::rbn::{self, RbnParams, RbnSystem};
use transients_core::seed::{self, domain};
use transients_core::tm::{TmRule, TmSystem};

use crate::config::{ExperimentConfig, SystemSpec};
use crate::store::{render_csv, series_from_records, ClassificationRecord, ResultRecord, Store};
use crate::CliError;

/// What a run produced, for exit-code purposes.
pub struct RunReport {
    pub truncated: bool,
}

/// Compute the estimate for one size of the configured family.
fn estimate_at(
    spec: &SystemSpec,
    config: &ExperimentConfig,
    size: u32,
) -> Result<TransientEstimate, CliError> {
    let settings = config.settings();
    let seed_value = size_seed(config.seed, size);
    let estimate = match spec {
        SystemSpec::Eca(rule) if size <= 64 => {
            let system = EcaSystem::new(*rule, size)?;
            estimate_average_transient(&system, &settings, seed_value)?
        }
        SystemSpec::Eca(rule) => {
            // Wide grids fall back to the general byte-per-cell path.
            let system = Ca1dSystem::new(Ca1dRule::from_wolfram(rule.number()), size)?;
            estimate_average_transient(&system, &settings, seed_value)?
        }
        SystemSpec::Ca1d(rule) => {
            let system = Ca1dSystem::new(rule.clone(), size)?;
            estimate_average_transient(&system, &settings, seed_value)?
        }
        SystemSpec::Ca2d(rule) => {
            let system = Ca2dSystem::new(rule.clone(), size)?;
            estimate_average_transient(&system, &settings, seed_value)?
        }
        SystemSpec::Tm(rule) => {
            let system = TmSystem::new(rule.clone(), size)?;
            estimate_average_transient(&system, &settings, seed_value)?
        }
        SystemSpec::Rbn { mean_k, bias } => {
            let params = RbnParams::new(size, *mean_k, *bias)?;
            let generator = |net_seed: u64| {
                RbnSystem::new(rbn::generate(&params, net_seed).expect("params validated"))
            };
            estimate_ensemble_average(generator, &settings, config.outer_batch, seed_value)?
        }
    };
    Ok(estimate)
}

/// The per-size loop shared by `classify` and the atlas: reuse stored
/// records, compute missing sizes in ascending order, stop after
/// consecutive budget-limited sizes.
fn run_series(
    spec: &SystemSpec,
    config: &ExperimentConfig,
    store: Option<&Store>,
    experiment: &str,
    quiet: bool,
) -> Result<BTreeMap<u32, ResultRecord>, CliError> {
    let descriptor = spec.descriptor();
    let mut records: BTreeMap<u32, ResultRecord> = match store {
        Some(store) => store.by_size(experiment)?,
        None => BTreeMap::new(),
    };
    let mut consecutive_limited = 0usize;
    for &size in &config.sizes {
        let record = match records.get(&size) {
            Some(existing) => existing.clone(),
            None => {
                let estimate = estimate_at(spec, config, size)?;
                let record = ResultRecord::new(experiment, &descriptor, size, &estimate);
                if let Some(store) = store {
                    store.append(&record)?;
                }
                records.insert(size, record.clone());
                record
            }
        };
        if !quiet {
            println!(
                "  {descriptor} size {:>4}: mean {:>12.3}  std {:>12.3}  m {:>5}  {:?}",
                record.size, record.mean, record.std, record.m, record.status
            );
        }
        if record.status == EstimateStatus::BudgetLimited {
            consecutive_limited += 1;
            if consecutive_limited >= SERIES_STOP_AFTER_LIMITED {
                break;
            }
        } else {
            consecutive_limited = 0;
        }
    }
    Ok(records)
}

/// Classify the configured system family over its size sweep.
pub fn run_classify(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    if config.sizes.is_empty() {
        return Err(CliError::Config("no sizes given (use --sizes)".into()));
    }
    config.settings().validate()?;
    let spec = SystemSpec::parse(&config.system)?;
    let experiment = config.experiment_id();

    let store = match &config.out {
        Some(dir) => {
            let store = Store::open(dir)?;
            store.write_or_check_config(&config.render())?;
            if !config.resume && !store.by_size(&experiment)?.is_empty() {
                return Err(CliError::Config(format!(
                    "output directory {dir:?} already holds results for this \
                     experiment; pass --resume to continue it or use a fresh --out"
                )));
            }
            Some(store)
        }
        None => None,
    };

    println!("experiment {experiment}: {}", spec.descriptor());
    let records = run_series(&spec, config, store.as_ref(), &experiment, false)?;
    let series = series_from_records(&records);
    let truncated = !series.limited.is_empty();

    if series.points.len() < transients_core::classifier::MIN_POINTS {
        return Err(CliError::Compute(format!(
            "only {} usable sizes (budget-limited from size {:?}); need at least {} to classify",
            series.points.len(),
            series.limited.first().map(|p| p.size),
            transients_core::classifier::MIN_POINTS
        )));
    }
    if series.points.len() < 10 {
        eprintln!(
            "warning: classifying on {} points; fits below 10 points are fragile",
            series.points.len()
        );
    }

    let mut classification = classify(&series)?;
    attach_annotations(&spec, &mut classification);
    print_classification(&spec.descriptor(), &classification);

    if let Some(store) = &store {
        store.write_classification(&ClassificationRecord {
            experiment: experiment.clone(),
            system: spec.descriptor(),
            classification,
            points_used: series.points.len(),
            limited_sizes: series.limited.iter().map(|p| p.size).collect(),
        })?;
        let csv_path = store.results_path().with_file_name("series.csv");
        std::fs::write(&csv_path, render_csv(&records))
            .map_err(|e| CliError::Io(format!("write {csv_path:?}: {e}")))?;
    }
    Ok(RunReport { truncated })
}

fn attach_annotations(spec: &SystemSpec, classification: &mut Classification) {
    if let SystemSpec::Eca(rule) = spec {
        classification
            .annotations
            .extend(transients_core::classifier::eca_annotations(rule));
    }
}

fn print_classification(descriptor: &str, classification: &Classification) {
    let fit = classification
        .fit
        .as_ref()
        .map(|f| format!("{:?} R²={:.4} params={:?}", f.model, f.r_squared, f.params))
        .unwrap_or_else(|| "-".to_string());
    let notes: Vec<String> = classification
        .annotations
        .iter()
        .map(|a| format!("{a:?}"))
        .collect();
    println!(
        "{descriptor}: {} {}{}",
        classification.label,
        fit,
        if notes.is_empty() {
            String::new()
        } else {
            format!(" [{}]", notes.join(", "))
        }
    );
}

/// One scan member outcome.
#[derive(Debug)]
struct ScanOutcome {
    cell: String,
    member: String,
    label: Option<Label>,
    detail: String,
}

fn classify_member(
    spec: &SystemSpec,
    config: &ExperimentConfig,
    store: Option<&Store>,
    experiment: &str,
) -> Result<(Option<Classification>, usize), CliError> {
    let records = run_series(spec, config, store, experiment, true)?;
    let series = series_from_records(&records);
    let points = series.points.len();
    if points < transients_core::classifier::MIN_POINTS {
        return Ok((None, points));
    }
    let mut classification = classify(&series)?;
    attach_annotations(spec, &mut classification);
    Ok((Some(classification), points))
}

/// The grid scanned by `scan`.
pub enum ScanGrid {
    /// Random transition tables per (states, symbols) cell.
    Tm {
        states: Vec<u8>,
        symbols: Vec<u8>,
        count: usize,
    },
    /// One ensemble classification per (mean K, bias) cell.
    Rbn { ks: Vec<f64>, ps: Vec<f64> },
    /// Random symmetric 2D rules.
    Ca2d { states: u8, count: usize },
}

/// Run an ensemble scan; per-member failures are recorded and the scan
/// continues.
pub fn run_scan(grid: &ScanGrid, config: &ExperimentConfig) -> Result<RunReport, CliError> {
    if config.sizes.is_empty() {
        return Err(CliError::Config("no sizes given (use --sizes)".into()));
    }
    config.settings().validate()?;
    let store = match &config.out {
        Some(dir) => Some(Store::open(dir)?),
        None => None,
    };

    let outcomes: Vec<ScanOutcome> = match grid {
        ScanGrid::Tm {
            states,
            symbols,
            count,
        } => {
            let mut jobs = Vec::new();
            for (cell_idx, (&s, &a)) in states
                .iter()
                .flat_map(|s| symbols.iter().map(move |a| (s, a)))
                .enumerate()
            {
                for member in 0..*count {
                    jobs.push((cell_idx, s, a, member));
                }
            }
            jobs.par_iter()
                .map(|&(cell_idx, s, a, member)| {
                    let rule_seed = seed::derive(
                        config.seed,
                        domain::SCAN,
                        (cell_idx as u64) << 32 | member as u64,
                    );
                    let cell = format!("tm {s}x{a}");
                    let member_name = format!("tm:{s}:{a}:seed={rule_seed}");
                    let rule = match TmRule::sample(s, a, rule_seed) {
                        Ok(rule) => rule,
                        Err(e) => {
                            return ScanOutcome {
                                cell,
                                member: member_name,
                                label: None,
                                detail: format!("generation failed: {e}"),
                            }
                        }
                    };
                    let mut member_config = config.clone();
                    member_config.seed = rule_seed;
                    scan_outcome(SystemSpec::Tm(rule), cell, member_name, &member_config)
                })
                .collect()
        }
        ScanGrid::Rbn { ks, ps } => {
            let cells: Vec<(f64, f64)> = ks
                .iter()
                .flat_map(|&k| ps.iter().map(move |&p| (k, p)))
                .collect();
            cells
                .par_iter()
                .map(|&(k, p)| {
                    let cell = format!("rbn K={k} p={p}");
                    let spec = SystemSpec::Rbn { mean_k: k, bias: p };
                    scan_outcome(spec, cell.clone(), cell, config)
                })
                .collect()
        }
        ScanGrid::Ca2d { states, count } => (0..*count)
            .into_par_iter()
            .map(|member| {
                let rule_seed = seed::derive(config.seed, domain::SCAN, member as u64);
                let cell = format!("ca2d q={states}");
                let member_name = format!("ca2d:{states}:seed={rule_seed}");
                let rule = match Ca2dRule::sample_symmetric(*states, rule_seed) {
                    Ok(rule) => rule,
                    Err(e) => {
                        return ScanOutcome {
                            cell,
                            member: member_name,
                            label: None,
                            detail: format!("generation failed: {e}"),
                        }
                    }
                };
                let mut member_config = config.clone();
                member_config.seed = rule_seed;
                scan_outcome(SystemSpec::Ca2d(rule), cell, member_name, &member_config)
            })
            .collect(),
    };

    let summary = summarize_scan(&outcomes);
    println!("{summary}");
    if let Some(store) = &store {
        let path = store.results_path().with_file_name("summary.txt");
        std::fs::write(&path, &summary)
            .map_err(|e| CliError::Io(format!("write {path:?}: {e}")))?;
        let outcomes_path = store.results_path().with_file_name("outcomes.jsonl");
        let mut lines = String::new();
        for outcome in &outcomes {
            let label = outcome
                .label
                .map(|l| l.to_string())
                .unwrap_or_else(|| "none".into());
            lines.push_str(&format!(
                "{}\n",
                serde_json::json!({
                    "cell": outcome.cell,
                    "member": outcome.member,
                    "label": label,
                    "detail": outcome.detail,
                })
            ));
        }
        std::fs::write(&outcomes_path, lines)
            .map_err(|e| CliError::Io(format!("write {outcomes_path:?}: {e}")))?;
    }
    Ok(RunReport { truncated: false })
}

fn scan_outcome(
    spec: SystemSpec,
    cell: String,
    member: String,
    config: &ExperimentConfig,
) -> ScanOutcome {
    match classify_member(&spec, config, None, "scan") {
        Ok((Some(classification), points)) => ScanOutcome {
            cell,
            member,
            label: Some(classification.label),
            detail: format!("{} points", points),
        },
        Ok((None, points)) => ScanOutcome {
            cell,
            member,
            label: None,
            detail: format!("only {points} usable points"),
        },
        Err(e) => ScanOutcome {
            cell,
            member,
            label: None,
            detail: format!("failed: {e}"),
        },
    }
}

const LABEL_ORDER: [Label; 6] = [
    Label::Bounded,
    Label::Log,
    Label::Lin,
    Label::Poly,
    Label::Exp,
    Label::Unclassified,
];

fn summarize_scan(outcomes: &[ScanOutcome]) -> String {
    let mut cells: BTreeMap<&str, Vec<&ScanOutcome>> = BTreeMap::new();
    for outcome in outcomes {
        cells.entry(&outcome.cell).or_default().push(outcome);
    }
    let mut out = String::new();
    for (cell, members) in cells {
        let total = members.len();
        out.push_str(&format!("{cell} ({total} members)\n"));
        for label in LABEL_ORDER {
            let count = members
                .iter()
                .filter(|o| o.label.unwrap_or(Label::Unclassified) == label)
                .count();
            if count > 0 {
                out.push_str(&format!(
                    "  {label:<12} {count:>4}  ({:.1}%)\n",
                    100.0 * count as f64 / total as f64
                ));
            }
        }
    }
    out
}

/// Classify every canonical elementary-CA representative.
pub fn run_atlas(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    if config.sizes.is_empty() {
        return Err(CliError::Config("no sizes given (use --sizes)".into()));
    }
    config.settings().validate()?;
    let store = match &config.out {
        Some(dir) => Some(Store::open(dir)?),
        None => None,
    };

    let rules = canonical_representatives();
    let rows: Vec<(u8, Result<(Option<Classification>, usize), CliError>)> = rules
        .par_iter()
        .map(|&k| {
            let spec = SystemSpec::Eca(EcaRule::from_wolfram(k));
            let mut rule_config = config.clone();
            rule_config.system = spec.descriptor();
            (k, classify_member(&spec, &rule_config, None, "atlas"))
        })
        .collect();

    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    let mut lines = String::new();
    for (k, row) in &rows {
        let text = match row {
            Ok((Some(c), _)) => {
                let notes: Vec<String> = c.annotations.iter().map(|a| format!("{a:?}")).collect();
                *histogram.entry(c.label.to_string()).or_default() += 1;
                format!(
                    "rule {k:>3}: {:<12} {}{}",
                    c.label.to_string(),
                    c.fit
                        .as_ref()
                        .map(|f| format!("{:?} R²={:.4}", f.model, f.r_squared))
                        .unwrap_or_else(|| "-".into()),
                    if notes.is_empty() {
                        String::new()
                    } else {
                        format!(" [{}]", notes.join(", "))
                    }
                )
            }
            Ok((None, points)) => {
                *histogram.entry("TooFewPoints".into()).or_default() += 1;
                format!("rule {k:>3}: too few usable points ({points})")
            }
            Err(e) => format!("rule {k:>3}: failed: {e}"),
        };
        println!("{text}");
        lines.push_str(&text);
        lines.push('\n');
    }
    lines.push('\n');
    for (label, count) in &histogram {
        lines.push_str(&format!("{label:<12} {count}\n"));
        println!("{label:<12} {count}");
    }
    if let Some(store) = &store {
        let path = store.results_path().with_file_name("atlas.txt");
        std::fs::write(&path, &lines).map_err(|e| CliError::Io(format!("write {path:?}: {e}")))?;
    }
    Ok(RunReport { truncated: false })
}

/// Emit the CSV series for one experiment id from a results store.
pub fn run_export(
    store_path: &Path,
    experiment: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let results_path = if store_path.is_dir() {
        store_path.join("results.jsonl")
    } else {
        store_path.to_path_buf()
    };
    let records = crate::store::load_records(&results_path)?;
    if records.is_empty() {
        return Err(CliError::Config(format!(
            "no records found in {results_path:?}"
        )));
    }
    let experiments: Vec<String> = {
        let mut seen = Vec::new();
        for r in &records {
            if !seen.contains(&r.experiment) {
                seen.push(r.experiment.clone());
            }
        }
        seen
    };
    let wanted = match experiment {
        Some(id) => {
            if !experiments.iter().any(|e| e == id) {
                return Err(CliError::Config(format!(
                    "experiment {id:?} not in store (have: {})",
                    experiments.join(", ")
                )));
            }
            id.to_string()
        }
        None if experiments.len() == 1 => experiments[0].clone(),
        None => {
            return Err(CliError::Config(format!(
                "store holds several experiments ({}); pass --id",
                experiments.join(", ")
            )))
        }
    };
    let mut by_size = BTreeMap::new();
    for record in records {
        if record.experiment == wanted {
            by_size.insert(record.size, record);
        }
    }
    let csv = render_csv(&by_size);
    match out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| CliError::Io(format!("write {path:?}: {e}")))?
        }
        None => print!("{csv}"),
    }
    Ok(())
}
