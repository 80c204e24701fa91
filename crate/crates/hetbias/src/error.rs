use std::path::PathBuf;

use thiserror::Error;

/// One rejected row of a trace file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedRow {
    /// 1-based line number in the input file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Model(#[from] hetbias_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0} already exists (pass --overwrite to replace it)")]
    OutputExists(PathBuf),
    #[error("trace header must be `user_id,timestamp,lat,lon,rx_bytes`, found `{0}`")]
    TraceHeader(String),
    #[error("{} malformed trace row(s): {}", .0.len(), describe_rows(.0))]
    MalformedTrace(Vec<MalformedRow>),
    #[error("{count} bandwidth point(s) unsatisfiable at the upper bound")]
    Unsatisfiable { count: usize },
    #[error("{0}")]
    Usage(String),
}

fn describe_rows(rows: &[MalformedRow]) -> String {
    rows.iter()
        .map(|r| format!("line {}: {}", r.line, r.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Self::Csv {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
