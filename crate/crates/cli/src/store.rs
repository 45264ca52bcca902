//! Append-only result persistence.
//!
//! Every per-size estimate is one JSON object per line in `results.jsonl`,
//! written as it completes, so an interrupted run can resume: sizes already
//! recorded for the same experiment id are reused instead of recomputed
//! (estimates are seed-deterministic, so a stored record equals what a rerun
//! would produce). The resolved configuration is echoed to `config.txt` and
//! checked on resume.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use transients_core::classifier::{Classification, GrowthSeries, SeriesPoint};
use transients_core::estimator::{EstimateStatus, TransientEstimate};

use crate::CliError;

/// One persisted per-size estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub system: String,
    pub size: u32,
    pub mean: f64,
    pub std: f64,
    pub m: usize,
    pub rel_halfwidth: Option<f64>,
    pub status: EstimateStatus,
    pub attempted: usize,
    pub exhausted: usize,
    /// Wall-clock write time; carries no result information.
    pub unix_ms: u128,
}

impl ResultRecord {
    pub fn new(experiment: &str, system: &str, size: u32, estimate: &TransientEstimate) -> Self {
        ResultRecord {
            experiment: experiment.to_string(),
            system: system.to_string(),
            size,
            mean: estimate.mean,
            std: estimate.std,
            m: estimate.m,
            rel_halfwidth: estimate.rel_halfwidth,
            status: estimate.status,
            attempted: estimate.attempted,
            exhausted: estimate.exhausted,
            unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
        }
    }

    pub fn estimate(&self) -> TransientEstimate {
        TransientEstimate {
            mean: self.mean,
            std: self.std,
            m: self.m,
            rel_halfwidth: self.rel_halfwidth,
            status: self.status,
            attempted: self.attempted,
            exhausted: self.exhausted,
        }
    }

    pub fn series_point(&self) -> SeriesPoint {
        SeriesPoint {
            size: self.size,
            estimate: self.estimate(),
        }
    }
}

/// A single experiment's output directory.
pub struct Store {
    dir: PathBuf,
}

impl Store {
    pub fn open(dir: &Path) -> Result<Store, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("create {dir:?}: {e}")))?;
        Ok(Store {
            dir: dir.to_path_buf(),
        })
    }

    pub fn results_path(&self) -> PathBuf {
        self.dir.join("results.jsonl")
    }

    pub fn config_path(&self) -> PathBuf {
        self.dir.join("config.txt")
    }

    pub fn classification_path(&self) -> PathBuf {
        self.dir.join("classification.json")
    }

    /// Echo the resolved config, or verify it matches a previous echo.
    pub fn write_or_check_config(&self, rendered: &str) -> Result<(), CliError> {
        let path = self.config_path();
        if path.exists() {
            let existing = fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("read {path:?}: {e}")))?;
            if existing != rendered {
                return Err(CliError::Config(format!(
                    "output directory {:?} holds a different experiment; \
                     refusing to mix results (delete it or change --out)",
                    self.dir
                )));
            }
            return Ok(());
        }
        fs::write(&path, rendered).map_err(|e| CliError::Io(format!("write {path:?}: {e}")))
    }

    pub fn append(&self, record: &ResultRecord) -> Result<(), CliError> {
        let path = self.results_path();
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| CliError::Io(format!("open {path:?}: {e}")))?;
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::Io(format!("encode record: {e}")))?;
        writeln!(file, "{line}").map_err(|e| CliError::Io(format!("write {path:?}: {e}")))?;
        file.flush()
            .map_err(|e| CliError::Io(format!("flush {path:?}: {e}")))
    }

    /// All records, in file order. A missing file is an empty store.
    pub fn load(&self) -> Result<Vec<ResultRecord>, CliError> {
        load_records(&self.results_path())
    }

    /// Records of one experiment, keyed by size.
    pub fn by_size(&self, experiment: &str) -> Result<BTreeMap<u32, ResultRecord>, CliError> {
        let mut map = BTreeMap::new();
        for record in self.load()? {
            if record.experiment == experiment {
                map.insert(record.size, record);
            }
        }
        Ok(map)
    }

    pub fn write_classification(&self, summary: &ClassificationRecord) -> Result<(), CliError> {
        let path = self.classification_path();
        let text = serde_json::to_string_pretty(summary)
            .map_err(|e| CliError::Io(format!("encode classification: {e}")))?;
        fs::write(&path, text).map_err(|e| CliError::Io(format!("write {path:?}: {e}")))
    }
}

/// Load records from a results file.
pub fn load_records(path: &Path) -> Result<Vec<ResultRecord>, CliError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("read {path:?}: {e}")))?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ResultRecord = serde_json::from_str(line)
            .map_err(|e| CliError::Io(format!("{path:?} line {}: bad record: {e}", idx + 1)))?;
        records.push(record);
    }
    Ok(records)
}

/// The final classification record written next to the per-size results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub experiment: String,
    pub system: String,
    pub classification: Classification,
    pub points_used: usize,
    pub limited_sizes: Vec<u32>,
}

/// Assemble the usable growth series from an experiment's records.
pub fn series_from_records(records: &BTreeMap<u32, ResultRecord>) -> GrowthSeries {
    let mut series = GrowthSeries {
        points: Vec::new(),
        limited: Vec::new(),
    };
    for record in records.values() {
        if record.status == EstimateStatus::BudgetLimited {
            series.limited.push(record.series_point());
        } else {
            series.points.push(record.series_point());
        }
    }
    series
}

fn format_float(value: f64) -> String {
    // Shortest representation that parses back to the same value.
    format!("{value}")
}

/// Render the per-size series as CSV, sizes ascending.
pub fn render_csv(records: &BTreeMap<u32, ResultRecord>) -> String {
    let mut out = String::from("size,mean,std,m,status\n");
    for record in records.values() {
        let status = match record.status {
            EstimateStatus::Converged => "converged",
            EstimateStatus::SampleCapReached => "sample_cap_reached",
            EstimateStatus::BudgetLimited => "budget_limited",
            EstimateStatus::DegenerateZero => "degenerate_zero",
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            record.size,
            format_float(record.mean),
            format_float(record.std),
            record.m,
            status
        ));
    }
    out
}
