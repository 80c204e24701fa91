//! Command execution: resolves the configuration, runs one experiment and
//! writes its result files plus a `<command>_meta.json` holding the
//! resolved configuration, its hash and the seed.

use std::fs;
use std::path::{Path, PathBuf};

use hetbias_core::optimizer::convexity_sweep_schemes;
use hetbias_core::{
    analyze_traces, required_bandwidth, BiasVector, ConvexityReport, CoverageReport, Error,
    Requirements, Scheme, TrialSet,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, MalformedRow, Result};
use crate::traces;

/// Sentinel written instead of a bandwidth when the upper bound fails.
pub const UNSATISFIABLE: &str = "unsatisfiable";

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Three-stage, CRE and full search over the convexity sweep.
    Sweep,
    /// Required bandwidth per total volume and scheme.
    Bandwidth,
    /// Trace CSV to per-state volumes and user convexity.
    Analyze { input: PathBuf },
    /// Coverage of one explicit bias vector (dB). With `convexity`, the
    /// class volumes come from the experiment demand at that convexity,
    /// as in the sweep; otherwise from the network profiles.
    Evaluate { bias_db: [f64; 3], convexity: Option<f64> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Bandwidth => "bandwidth",
            Command::Analyze { .. } => "analyze",
            Command::Evaluate { .. } => "evaluate",
        }
    }

    /// Files written into the output directory.
    pub fn outputs(&self) -> &'static [&'static str] {
        match self {
            Command::Sweep => &["sweep.csv", "sweep_meta.json"],
            Command::Bandwidth => &["bandwidth.csv", "bandwidth_meta.json"],
            Command::Analyze { .. } => &["report.json", "segments.csv", "analyze_meta.json"],
            Command::Evaluate { .. } => &["evaluate.json", "evaluate_meta.json"],
        }
    }
}

/// One invocation: command, inputs and command-line overrides.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: Command,
    /// Defaults apply when absent.
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub trials: Option<usize>,
    pub overwrite: bool,
    pub strict: bool,
}

impl RunManifest {
    pub fn new(command: Command, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            command,
            config_path: None,
            output_dir: output_dir.into(),
            seed: None,
            scheme: None,
            trials: None,
            overwrite: false,
            strict: false,
        }
    }

    /// Config file (or defaults) with the overrides applied, validated.
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut config = match &self.config_path {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.network.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.network.trials = trials;
        }
        if let Some(scheme) = self.scheme {
            config.experiment.sweep_schemes = vec![scheme];
            config.experiment.bandwidth_schemes = vec![scheme];
        }
        if self.strict {
            config.analysis.strict = true;
        }
        config.validate()?;
        Ok(config)
    }

    fn output_path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

/// Paths written by a successful run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Meta<'a, D: Serialize> {
    command: &'static str,
    version: &'static str,
    config_hash: String,
    seed: u64,
    outputs: &'static [&'static str],
    config: &'a RunConfig,
    details: D,
}

#[derive(Serialize)]
struct SweepCsvRow {
    convexity: f64,
    scheme: &'static str,
    avg_coverage: f64,
    cov_stationary: f64,
    cov_walking: f64,
    cov_vehicular: f64,
    bias_s: f64,
    bias_w: f64,
    bias_v: f64,
    feasible: bool,
}

#[derive(Serialize)]
struct BandwidthCsvRow {
    total_volume: f64,
    scheme: &'static str,
    required_bandwidth_hz: String,
}

#[derive(Serialize)]
struct BandwidthDetail {
    total_volume: f64,
    scheme: Scheme,
    required_bandwidth_hz: Option<f64>,
    /// Class failing at the upper bound, when unsatisfiable.
    failing_class: Option<&'static str>,
}

#[derive(Serialize)]
struct AnalyzeDetails {
    input_sha256: String,
    samples: usize,
    skipped_rows: Vec<SkippedRow>,
    segments: usize,
}

#[derive(Serialize)]
struct SkippedRow {
    line: u64,
    reason: String,
}

impl From<MalformedRow> for SkippedRow {
    fn from(row: MalformedRow) -> Self {
        Self {
            line: row.line,
            reason: row.reason,
        }
    }
}

#[derive(Serialize)]
struct EvaluateOutput {
    bias_db: [f64; 3],
    bias: BiasVector,
    convexity: Option<f64>,
    volumes: [f64; 3],
    report: CoverageReport,
}

/// Runs `manifest`. Refuses to touch existing outputs without
/// `overwrite`; creates the output directory when missing.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    let config = manifest.resolve_config()?;
    prepare_output_dir(manifest)?;
    match &manifest.command {
        Command::Sweep => run_sweep(manifest, &config),
        Command::Bandwidth => run_bandwidth(manifest, &config),
        Command::Analyze { input } => run_analyze(manifest, &config, input),
        Command::Evaluate { bias_db, convexity } => run_evaluate(manifest, &config, *bias_db, *convexity),
    }
}

fn prepare_output_dir(manifest: &RunManifest) -> Result<()> {
    let dir = &manifest.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    if !manifest.overwrite {
        for name in manifest.command.outputs() {
            let path = manifest.output_path(name);
            if path.exists() {
                return Err(CliError::OutputExists(path));
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| CliError::csv(path, e))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    write_file(path, &bytes)
}

fn write_meta<D: Serialize>(manifest: &RunManifest, config: &RunConfig, details: D) -> Result<PathBuf> {
    let name = manifest.command.outputs().last().expect("meta file listed last");
    let path = manifest.output_path(name);
    write_json(
        &path,
        &Meta {
            command: manifest.command.name(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: config.hash(),
            seed: config.network.seed,
            outputs: manifest.command.outputs(),
            config,
            details,
        },
    )?;
    Ok(path)
}

fn run_sweep(manifest: &RunManifest, config: &RunConfig) -> Result<RunOutcome> {
    let exp = &config.experiment;
    let grid = exp.grid()?;
    log::info!(
        "sweep: {} convexity values x {} schemes, {} trials",
        exp.convexity_values.len(),
        exp.sweep_schemes.len(),
        config.network.trials
    );
    let rows = convexity_sweep_schemes(
        &exp.demand,
        &exp.convexity_values,
        &config.network,
        &grid,
        &exp.sweep_schemes,
    )?;
    let csv_rows: Vec<SweepCsvRow> = rows
        .iter()
        .map(|row| {
            let r = &row.result;
            let [bias_s, bias_w, bias_v] = r.bias.to_db();
            let [cov_stationary, cov_walking, cov_vehicular] = r.report.per_class_coverage;
            SweepCsvRow {
                convexity: row.convexity,
                scheme: r.scheme.name(),
                avg_coverage: r.report.average_coverage,
                cov_stationary,
                cov_walking,
                cov_vehicular,
                bias_s,
                bias_w,
                bias_v,
                feasible: r.feasible,
            }
        })
        .collect();
    let csv_path = manifest.output_path("sweep.csv");
    write_csv(&csv_path, &csv_rows)?;
    let meta = write_meta(manifest, config, serde_json::json!({ "rows": csv_rows.len() }))?;
    Ok(RunOutcome {
        files: vec![csv_path, meta],
    })
}

fn run_bandwidth(manifest: &RunManifest, config: &RunConfig) -> Result<RunOutcome> {
    let exp = &config.experiment;
    let grid = exp.grid()?;
    let mut csv_rows = Vec::new();
    let mut details = Vec::new();
    let mut unsatisfiable = 0;
    for &volume in &exp.bandwidth_volumes {
        let network = exp.demand.with_total(volume).apply(&config.network)?;
        for &scheme in &exp.bandwidth_schemes {
            log::info!("bandwidth: {volume} MB/day, {scheme}");
            let (value, failing) =
                match required_bandwidth(&network, &grid, scheme, exp.w_min, exp.w_max, exp.tolerance) {
                    Ok(w) => (Some(w), None),
                    Err(Error::Unsatisfiable(class)) => {
                        unsatisfiable += 1;
                        (None, Some(class.name()))
                    }
                    Err(e) => return Err(e.into()),
                };
            csv_rows.push(BandwidthCsvRow {
                total_volume: volume,
                scheme: scheme.name(),
                required_bandwidth_hz: value.map_or_else(|| UNSATISFIABLE.to_string(), |w| w.to_string()),
            });
            details.push(BandwidthDetail {
                total_volume: volume,
                scheme,
                required_bandwidth_hz: value,
                failing_class: failing,
            });
        }
    }
    let csv_path = manifest.output_path("bandwidth.csv");
    write_csv(&csv_path, &csv_rows)?;
    let meta = write_meta(manifest, config, details)?;
    if unsatisfiable > 0 {
        return Err(CliError::Unsatisfiable { count: unsatisfiable });
    }
    Ok(RunOutcome {
        files: vec![csv_path, meta],
    })
}

fn run_analyze(manifest: &RunManifest, config: &RunConfig, input: &Path) -> Result<RunOutcome> {
    let bytes = fs::read(input).map_err(|e| CliError::io(input, e))?;
    let file = traces::read_traces(bytes.as_slice(), input, config.analysis.strict)?;
    for row in &file.skipped {
        log::warn!("{}: line {}: {} (skipped)", input.display(), row.line, row.reason);
    }
    let samples = file.samples.len();
    let details = |segments: usize| AnalyzeDetails {
        input_sha256: hex::encode(Sha256::digest(&bytes)),
        samples,
        skipped_rows: file.skipped.iter().cloned().map(SkippedRow::from).collect(),
        segments,
    };
    let report_path = manifest.output_path("report.json");
    let analysis = match analyze_traces(&file.samples, config.analysis.stationary_cutoff_kmh) {
        Ok(analysis) => analysis,
        Err(Error::ConvexityUndefined(report)) => {
            // Volumes are still meaningful; publish them with a null convexity.
            write_json(&report_path, &*report as &ConvexityReport)?;
            write_meta(manifest, config, details(0))?;
            return Err(Error::ConvexityUndefined(report).into());
        }
        Err(e) => return Err(e.into()),
    };
    write_json(&report_path, &analysis.report)?;
    let segments_path = manifest.output_path("segments.csv");
    let mut buffer = Vec::new();
    traces::write_segments(&mut buffer, &analysis.segments, &segments_path)?;
    write_file(&segments_path, &buffer)?;
    let meta = write_meta(manifest, config, details(analysis.segments.len()))?;
    Ok(RunOutcome {
        files: vec![report_path, segments_path, meta],
    })
}

fn run_evaluate(
    manifest: &RunManifest,
    config: &RunConfig,
    bias_db: [f64; 3],
    convexity: Option<f64>,
) -> Result<RunOutcome> {
    let bias = BiasVector::from_db(bias_db[0], bias_db[1], bias_db[2])?;
    let network = match convexity {
        Some(c) if !(c.is_finite() && c > 0.0) => {
            return Err(CliError::Usage("--convexity must be finite and > 0".into()))
        }
        Some(c) => config.experiment.demand.with_convexity(c).apply(&config.network)?,
        None => config.network.clone(),
    };
    let requirements = Requirements::from_config(&network)?;
    let report = TrialSet::sample(&network)?.evaluate(&bias, &requirements)?;
    let path = manifest.output_path("evaluate.json");
    write_json(
        &path,
        &EvaluateOutput {
            bias_db,
            bias,
            convexity,
            volumes: network.profiles.map(|p| p.traffic_volume),
            report,
        },
    )?;
    let meta = write_meta(manifest, config, serde_json::json!({ "bias_db": bias_db, "convexity": convexity }))?;
    Ok(RunOutcome { files: vec![path, meta] })
}
