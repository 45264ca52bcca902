//! Command-line pipeline for transient-growth classification experiments.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 when the compute
//! was truncated by the per-trajectory budget.

mod config;
mod render;
mod run;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{parse_sizes, ExperimentConfig, SystemSpec};
use render::{DiagramFormat, RenderRequest};
use run::ScanGrid;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Ca(#[from] transients_core::ca::CaError),
    #[error(transparent)]
    Tm(#[from] transients_core::tm::TmError),
    #[error(transparent)]
    Rbn(#[from] transients_core::rbn::RbnError),
    #[error(transparent)]
    Estimator(#[from] transients_core::estimator::EstimatorError),
    #[error(transparent)]
    Classifier(#[from] transients_core::classifier::ClassifyError),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "transients",
    about = "Estimate and classify the growth of average transient lengths \
             of discrete dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate one system family over a size sweep and classify its growth.
    Classify(ClassifyArgs),
    /// Classify an ensemble grid (random machines, networks, or 2D rules).
    Scan(ScanArgs),
    /// Classify all 88 canonical elementary-CA representatives.
    AtlasEca(AtlasArgs),
    /// Render a space-time diagram.
    Render(RenderArgs),
    /// Emit the per-size CSV series of a stored experiment.
    Export(ExportArgs),
}

/// Flags shared by the estimating subcommands; each overrides the same key
/// from `--config`.
#[derive(Args, Clone)]
struct EstimatorArgs {
    /// Key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sizes: `a..b`, `a..b:step`, or a comma list.
    #[arg(long)]
    sizes: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Target relative half-width of the confidence interval.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Samples per stopping-rule evaluation.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    min_samples: Option<usize>,
    #[arg(long)]
    max_samples: Option<usize>,
    /// Per-trajectory step budget.
    #[arg(long)]
    step_cap: Option<u64>,
    /// Per-trajectory wall-clock budget in seconds.
    #[arg(long)]
    budget_secs: Option<f64>,
    /// Networks per outer batch for ensemble estimates.
    #[arg(long)]
    outer_batch: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for results and the config echo.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reuse sizes already recorded in the output directory.
    #[arg(long)]
    resume: bool,
}

impl EstimatorArgs {
    fn resolve(&self, system: Option<String>) -> Result<ExperimentConfig, CliError> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {path:?}: {e}")))?;
            config.apply_file(&text)?;
        }
        if let Some(system) = system {
            config.system = system;
        }
        if let Some(sizes) = &self.sizes {
            config.sizes = parse_sizes(sizes)?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(epsilon) = self.epsilon {
            config.epsilon = epsilon;
        }
        if let Some(batch) = self.batch {
            config.batch = batch;
        }
        if let Some(min_samples) = self.min_samples {
            config.min_samples = min_samples;
        }
        if let Some(max_samples) = self.max_samples {
            config.max_samples = max_samples;
        }
        if let Some(step_cap) = self.step_cap {
            config.step_cap = step_cap;
        }
        if let Some(budget_secs) = self.budget_secs {
            config.budget_secs = budget_secs;
        }
        if let Some(outer_batch) = self.outer_batch {
            config.outer_batch = outer_batch;
        }
        if let Some(workers) = self.workers {
            config.workers = workers;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        if self.resume {
            config.resume = true;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct ClassifyArgs {
    /// System spec, e.g. `eca:110`, `life`, `totalistic:1635:3:1`,
    /// `tm:7:4:seed=3`, `rbn:2:0.5`, `file:<path>`.
    #[arg(long)]
    system: Option<String>,
    /// Rule file (equivalent to `--system file:<path>`).
    #[arg(long)]
    rule_file: Option<PathBuf>,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(subcommand)]
    grid: ScanGridArgs,
}

#[derive(Subcommand)]
enum ScanGridArgs {
    /// Random transition tables over a (states, symbols) grid.
    Tm {
        /// State counts, e.g. `7` or `4,5,6`.
        #[arg(long)]
        states: String,
        /// Symbol counts.
        #[arg(long)]
        symbols: String,
        /// Machines per grid cell.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Network ensembles over a (mean connectivity, bias) grid.
    Rbn {
        /// Mean connectivity values, e.g. `1,2,4`.
        #[arg(long)]
        k: String,
        /// Bias values, e.g. `0.5`.
        #[arg(long)]
        p: String,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Random square-symmetric 2D rules.
    Ca2d {
        /// Cell states.
        #[arg(long, default_value_t = 3)]
        q: u8,
        /// Rules to sample.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
}

#[derive(Args)]
struct AtlasArgs {
    #[command(flatten)]
    estimator: EstimatorArgs,
}

#[derive(Args)]
struct RenderArgs {
    /// System spec (same grammar as `classify --system`).
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    rule_file: Option<PathBuf>,
    /// Grid size / tape length / torus side.
    #[arg(long)]
    size: u32,
    /// Rows to render (including the initial one).
    #[arg(long, default_value_t = 64)]
    rows: usize,
    /// Steps between rendered rows (use the tape length for machine
    /// diagrams comparable to CA pictures).
    #[arg(long, default_value_t = 1)]
    stride: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `text` or `pgm`.
    #[arg(long, default_value = "text")]
    format: String,
    /// Output file (PGM for 2D systems: output directory of frames).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// Results store: an output directory or a results.jsonl path.
    #[arg(long)]
    store: PathBuf,
    /// Experiment id (optional when the store holds exactly one).
    #[arg(long)]
    id: Option<String>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn system_arg(
    system: Option<String>,
    rule_file: Option<PathBuf>,
) -> Result<Option<String>, CliError> {
    match (system, rule_file) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either --system or --rule-file, not both".into(),
        )),
        (system, None) => Ok(system),
        (None, Some(path)) => Ok(Some(format!("file:{}", path.display()))),
    }
}

fn in_worker_pool<T>(
    workers: usize,
    body: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    if workers == 0 {
        return body();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(body)
}

fn dispatch(cli: Cli) -> Result<run::RunReport, CliError> {
    match cli.command {
        Command::Classify(args) => {
            let system = system_arg(args.system, args.rule_file)?;
            let config = args.estimator.resolve(system)?;
            if config.system.is_empty() {
                return Err(CliError::Config(
                    "no system given (use --system or --rule-file)".into(),
                ));
            }
            in_worker_pool(config.workers, || run::run_classify(&config))
        }
        Command::Scan(args) => {
            let (grid, estimator) = match args.grid {
                ScanGridArgs::Tm {
                    states,
                    symbols,
                    count,
                    estimator,
                } => (
                    ScanGrid::Tm {
                        states: parse_u8_list(&states)?,
                        symbols: parse_u8_list(&symbols)?,
                        count,
                    },
                    estimator,
                ),
                ScanGridArgs::Rbn { k, p, estimator } => (
                    ScanGrid::Rbn {
                        ks: parse_f64_list(&k)?,
                        ps: parse_f64_list(&p)?,
                    },
                    estimator,
                ),
                ScanGridArgs::Ca2d {
                    q,
                    count,
                    estimator,
                } => (ScanGrid::Ca2d { states: q, count }, estimator),
            };
            let config = estimator.resolve(None)?;
            in_worker_pool(config.workers, || run::run_scan(&grid, &config))
        }
        Command::AtlasEca(args) => {
            let mut config = args.estimator.resolve(None)?;
            if config.sizes.is_empty() {
                config.sizes = (3..=60).collect();
            }
            in_worker_pool(config.workers, || run::run_atlas(&config))
        }
        Command::Render(args) => {
            let system = system_arg(args.system, args.rule_file)?
                .ok_or_else(|| CliError::Config("no system given".into()))?;
            let format = match args.format.as_str() {
                "text" => DiagramFormat::Text,
                "pgm" => DiagramFormat::Pgm,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown format {other:?} (need text or pgm)"
                    )))
                }
            };
            let request = RenderRequest {
                spec: SystemSpec::parse(&system)?,
                size: args.size,
                rows: args.rows,
                stride: args.stride,
                seed: args.seed,
                format,
            };
            render::run_render(&request, &args.out)?;
            Ok(run::RunReport { truncated: false })
        }
        Command::Export(args) => {
            run::run_export(&args.store, args.id.as_deref(), args.out.as_deref())?;
            Ok(run::RunReport { truncated: false })
        }
    }
}

fn parse_u8_list(text: &str) -> Result<Vec<u8>, CliError> {
    text.split(',')
        .map(|f| {
            f.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad list entry {f:?}")))
        })
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|f| {
            f.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad list entry {f:?}")))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(report) if report.truncated => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
