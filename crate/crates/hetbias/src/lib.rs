//! Files and command line for [`hetbias_core`]: JSON run configuration,
//! trace CSV input, sweep/bandwidth CSV and report/meta JSON output.
//!
//! The `hetbias` binary is a thin wrapper over [`run::run`].

pub mod config;
mod error;
pub mod run;
pub mod traces;

pub use config::{AnalysisConfig, ExperimentConfig, RunConfig};
pub use error::{CliError, MalformedRow, Result};
pub use hetbias_core as core;
pub use run::{run, Command, RunManifest, RunOutcome, UNSATISFIABLE};
