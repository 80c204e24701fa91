//! Mobility/data-usage trace processing.
//!
//! Consecutive location samples of a user form segments; each segment gets
//! the great-circle velocity between its endpoints, a mobility state, and
//! the bytes reported by its closing sample. Per-user volumes are per-state
//! byte totals over the observed span (MB/day); population volumes are the
//! unweighted mean over users.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{UserClass, VEHICULAR_THRESHOLD_KMH};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Default velocity floor below which a user is stationary, km/h.
pub const DEFAULT_STATIONARY_CUTOFF_KMH: f64 = 0.5;

const MS_PER_DAY: f64 = 86_400_000.0;
const BYTES_PER_MB: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub user_id: String,
    /// Unix time, milliseconds.
    pub timestamp_ms: i64,
    /// Degrees.
    pub latitude: f64,
    /// Degrees.
    pub longitude: f64,
    /// Bytes received since the previous sample of the same user.
    pub rx_bytes: u64,
}

impl TraceSample {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::InvalidSample("latitude outside [-90, 90]"));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::InvalidSample("longitude outside [-180, 180]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilitySegment {
    pub user_id: String,
    pub start_ms: i64,
    pub end_ms: i64,
    pub state: UserClass,
    /// km/h.
    pub velocity: f64,
    pub rx_bytes: u64,
}

impl MobilitySegment {
    /// Whether the segment spans `interval_ms` to within 10 %.
    pub fn is_regular(&self, interval_ms: i64) -> bool {
        let span = (self.end_ms - self.start_ms) as f64;
        (span - interval_ms as f64).abs() <= 0.1 * interval_ms as f64
    }
}

/// Aggregated per-state volumes of a population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    /// MB/day: stationary, walking, vehicular.
    pub per_state_volume: [f64; 3],
    pub per_state_share: [f64; 3],
    /// Vehicular over walking volume; `None` when walking volume is zero.
    pub user_convexity: Option<f64>,
    /// MB/day.
    pub total_volume: f64,
    pub user_count: usize,
}

/// Great-circle distance in meters.
pub fn haversine_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let d_phi = phi2 - phi1;
    let d_lambda = (lon2 - lon1).to_radians();
    let s_phi = math::sin(d_phi / 2.0);
    let s_lambda = math::sin(d_lambda / 2.0);
    let a = s_phi * s_phi + math::cos(phi1) * math::cos(phi2) * s_lambda * s_lambda;
    2.0 * EARTH_RADIUS_M * math::asin(math::sqrt(a.min(1.0)))
}

/// Mean velocity (km/h) between two samples of the same user, assuming
/// linear movement.
pub fn compute_velocity(previous: &TraceSample, current: &TraceSample) -> Result<f64> {
    if previous.user_id != current.user_id {
        return Err(Error::UserMismatch);
    }
    if current.timestamp_ms <= previous.timestamp_ms {
        return Err(Error::Ordering {
            user_id: current.user_id.clone(),
        });
    }
    let meters = haversine_distance(
        previous.latitude,
        previous.longitude,
        current.latitude,
        current.longitude,
    );
    let hours = (current.timestamp_ms - previous.timestamp_ms) as f64 / 3_600_000.0;
    Ok(meters / 1000.0 / hours)
}

/// Vehicular strictly above 10 km/h, stationary at or below
/// `stationary_cutoff`, walking in between.
pub fn classify_mobility(velocity: f64, stationary_cutoff: f64) -> UserClass {
    if velocity > VEHICULAR_THRESHOLD_KMH {
        UserClass::Vehicular
    } else if velocity <= stationary_cutoff {
        UserClass::Stationary
    } else {
        UserClass::Walking
    }
}

/// Segments between consecutive samples of one user.
pub fn build_segments(samples: &[TraceSample], stationary_cutoff: f64) -> Result<Vec<MobilitySegment>> {
    samples
        .windows(2)
        .map(|pair| {
            let (prev, cur) = (&pair[0], &pair[1]);
            let velocity = compute_velocity(prev, cur)?;
            Ok(MobilitySegment {
                user_id: cur.user_id.clone(),
                start_ms: prev.timestamp_ms,
                end_ms: cur.timestamp_ms,
                state: classify_mobility(velocity, stationary_cutoff),
                velocity,
                rx_bytes: cur.rx_bytes,
            })
        })
        .collect()
}

/// Per-state volumes (MB/day) of segments spanning `span_ms`.
fn volumes_per_day(segments: &[MobilitySegment], span_ms: i64) -> [f64; 3] {
    let mut bytes = [0u64; 3];
    for segment in segments {
        bytes[segment.state.index()] += segment.rx_bytes;
    }
    let days = span_ms as f64 / MS_PER_DAY;
    bytes.map(|b| b as f64 / BYTES_PER_MB / days)
}

/// Per-state volumes (MB/day) of one user's time-ordered samples.
pub fn aggregate_user(samples: &[TraceSample], stationary_cutoff: f64) -> Result<[f64; 3]> {
    if samples.len() < 2 {
        let who = samples.first().map(|s| s.user_id.as_str()).unwrap_or("");
        return Err(Error::InsufficientData(format!(
            "user `{who}` has {} sample(s), at least 2 are needed",
            samples.len()
        )));
    }
    let segments = build_segments(samples, stationary_cutoff)?;
    let span = samples[samples.len() - 1].timestamp_ms - samples[0].timestamp_ms;
    Ok(volumes_per_day(&segments, span))
}

/// Unweighted mean over users of per-state volumes.
pub fn aggregate_population(per_user: &[[f64; 3]]) -> Result<ConvexityReport> {
    if per_user.is_empty() {
        return Err(Error::InsufficientData("no users to aggregate".into()));
    }
    let n = per_user.len() as f64;
    let mut sums = [0.0; 3];
    for triple in per_user {
        for (s, v) in sums.iter_mut().zip(triple) {
            *s += v;
        }
    }
    let per_state_volume = sums.map(|s| s / n);
    let total_volume: f64 = per_state_volume.iter().sum();
    let per_state_share = if total_volume > 0.0 {
        per_state_volume.map(|v| v / total_volume)
    } else {
        [0.0; 3]
    };
    let walking = per_state_volume[UserClass::Walking.index()];
    let vehicular = per_state_volume[UserClass::Vehicular.index()];
    let mut report = ConvexityReport {
        per_state_volume,
        per_state_share,
        user_convexity: None,
        total_volume,
        user_count: per_user.len(),
    };
    if walking > 0.0 {
        report.user_convexity = Some(vehicular / walking);
        Ok(report)
    } else {
        Err(Error::ConvexityUndefined(Box::new(report)))
    }
}

/// Report plus the segments it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceAnalysis {
    pub report: ConvexityReport,
    /// Grouped by user id (ascending), time order within a user.
    pub segments: Vec<MobilitySegment>,
}

/// Full pipeline over samples of many users. Samples may interleave
/// between users but must be time-ordered within each user.
pub fn analyze_traces(samples: &[TraceSample], stationary_cutoff: f64) -> Result<TraceAnalysis> {
    let mut by_user: BTreeMap<&str, Vec<TraceSample>> = BTreeMap::new();
    for sample in samples {
        sample.validate()?;
        by_user.entry(sample.user_id.as_str()).or_default().push(sample.clone());
    }
    if by_user.is_empty() {
        return Err(Error::InsufficientData("trace contains no samples".into()));
    }
    let mut triples = Vec::with_capacity(by_user.len());
    let mut segments = Vec::new();
    for user_samples in by_user.values() {
        triples.push(aggregate_user(user_samples, stationary_cutoff)?);
        segments.extend(build_segments(user_samples, stationary_cutoff)?);
    }
    let report = aggregate_population(&triples)?;
    Ok(TraceAnalysis { report, segments })
}
