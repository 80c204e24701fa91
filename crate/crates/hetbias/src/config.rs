//! Run configuration file (JSON).
//!
//! ```json
//! {
//!   "network":    { ...NetworkConfig fields, all optional... },
//!   "experiment": { "convexity_values": [1, 2, 3.04], "grid_db": [0, 2, 4], ... },
//!   "analysis":   { "stationary_cutoff_kmh": 0.5 }
//! }
//! ```
//!
//! Every section and field is optional; unknown keys are rejected.

use std::path::Path;

use hetbias_core::optimizer::BiasGrid;
use hetbias_core::trace::DEFAULT_STATIONARY_CUTOFF_KMH;
use hetbias_core::{DemandScenario, Error, NetworkConfig, Scheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Everything a command needs besides its command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub experiment: ExperimentConfig,
    pub analysis: AnalysisConfig,
}

/// Sweep, bandwidth and evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Vehicular-to-walking volume ratios of the convexity sweep.
    pub convexity_values: Vec<f64>,
    /// Demand split; the sweep varies its convexity, the bandwidth
    /// experiment its total volume.
    pub demand: DemandScenario,
    /// Bias candidates, dB. Must start at 0 and increase strictly.
    pub grid_db: Vec<f64>,
    pub sweep_schemes: Vec<Scheme>,
    /// Total volumes (MB/day) of the bandwidth experiment.
    pub bandwidth_volumes: Vec<f64>,
    pub bandwidth_schemes: Vec<Scheme>,
    /// Bandwidth search interval and resolution, Hz.
    pub w_min: f64,
    pub w_max: f64,
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            convexity_values: vec![1.0, 2.0, 3.04, 4.0, 5.0, 6.0, 7.0, 8.0],
            demand: DemandScenario::MEASURED_2015,
            grid_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            sweep_schemes: Scheme::ALL.to_vec(),
            bandwidth_volumes: vec![145.05, 290.1],
            bandwidth_schemes: vec![Scheme::ThreeStage, Scheme::Cre],
            w_min: 0.1e6,
            w_max: 100.0e6,
            tolerance: 0.1e6,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<BiasGrid> {
        BiasGrid::from_db(&self.grid_db).map_err(|_| invalid("experiment.grid_db", "must start at 0 dB and increase strictly"))
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .convexity_values
            .iter()
            .any(|c| !(c.is_finite() && *c > 0.0))
        {
            return Err(invalid("experiment.convexity_values", "must be finite and > 0"));
        }
        self.demand.validate().map_err(|e| match e {
            Error::InvalidInput(reason) => invalid("experiment.demand", reason),
            other => other.into(),
        })?;
        self.grid()?;
        if self
            .bandwidth_volumes
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(invalid("experiment.bandwidth_volumes", "must be finite and >= 0"));
        }
        if !(self.w_min > 0.0 && self.w_min.is_finite()) {
            return Err(invalid("experiment.w_min", "must be finite and > 0"));
        }
        if !(self.w_max >= self.w_min && self.w_max.is_finite()) {
            return Err(invalid("experiment.w_max", "must be finite and >= w_min"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(invalid("experiment.tolerance", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Trace analysis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Velocity (km/h) at or below which a segment counts as stationary.
    pub stationary_cutoff_kmh: f64,
    /// Abort on the first malformed row instead of skipping it.
    pub strict: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            stationary_cutoff_kmh: DEFAULT_STATIONARY_CUTOFF_KMH,
            strict: false,
        }
    }
}

fn invalid(field: &'static str, reason: &'static str) -> CliError {
    CliError::Model(Error::InvalidConfig { field, reason })
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| CliError::ConfigParse {
            path: origin.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.experiment.validate()?;
        if !(self.analysis.stationary_cutoff_kmh >= 0.0
            && self.analysis.stationary_cutoff_kmh < hetbias_core::model::VEHICULAR_THRESHOLD_KMH)
        {
            return Err(invalid("analysis.stationary_cutoff_kmh", "must lie in [0, 10) km/h"));
        }
        Ok(())
    }

    /// SHA-256 (hex) of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
