//! Shared helpers: synthetic traces and CLI invocation.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use hetbias_core::trace::EARTH_RADIUS_M;

/// Five-minute segments in one day.
const SEGMENTS_PER_DAY: usize = 288;
const PARKED: usize = 200;
const WALKING: usize = 40;
const DRIVING: usize = SEGMENTS_PER_DAY - PARKED - WALKING;
/// Per-segment displacement: 0.215 km and 2.658 km in 5 minutes are
/// 2.58 km/h and 31.9 km/h.
const WALK_STEP_M: f64 = 215.0;
const DRIVE_STEP_M: f64 = 2658.0;

/// Splits `total` bytes over `n` segments, remainder on the last one.
fn split(total: u64, n: usize) -> Vec<u64> {
    let each = total / n as u64;
    let mut parts = vec![each; n];
    parts[n - 1] += total - each * n as u64;
    parts
}

/// CSV lines (no header) of one user observed for exactly one day whose
/// stationary/walking/vehicular volumes are `volumes` MB.
pub fn user_day(user_id: &str, volumes: [f64; 3], start_unix: i64) -> Vec<String> {
    let bytes = volumes.map(|mb| (mb * 1e6).round() as u64);
    let mut steps: Vec<(f64, u64)> = Vec::with_capacity(SEGMENTS_PER_DAY);
    steps.extend(split(bytes[0], PARKED).into_iter().map(|b| (0.0, b)));
    steps.extend(split(bytes[1], WALKING).into_iter().map(|b| (WALK_STEP_M, b)));
    steps.extend(split(bytes[2], DRIVING).into_iter().map(|b| (DRIVE_STEP_M, b)));

    let timestamp = |i: usize| {
        chrono::DateTime::from_timestamp(start_unix + 300 * i as i64, 0)
            .unwrap()
            .format("%Y-%m-%dT%H:%M:%SZ")
            .to_string()
    };
    let mut lat: f64 = 37.5;
    let lon = 127.0;
    let mut lines = vec![format!("{user_id},{},{lat:.9},{lon},0", timestamp(0))];
    for (i, (meters, b)) in steps.into_iter().enumerate() {
        lat += (meters / EARTH_RADIUS_M).to_degrees();
        // Turn around before leaving valid latitudes.
        if lat > 80.0 {
            lat -= 2.0 * (meters / EARTH_RADIUS_M).to_degrees();
        }
        lines.push(format!("{user_id},{},{lat:.9},{lon},{b}", timestamp(i + 1)));
    }
    lines
}

/// 2015-03-02T00:00:00Z.
pub const DAY_2015: i64 = 1_425_254_400;

pub fn trace_csv(users: &[(&str, [f64; 3])]) -> String {
    let mut out = String::from("user_id,timestamp,lat,lon,rx_bytes\n");
    for (id, volumes) in users {
        for line in user_day(id, *volumes, DAY_2015) {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

/// Small, fast run configuration for CLI tests.
pub const FAST_CONFIG: &str = r#"{
  "network": { "trials": 6, "user_count": 120 },
  "experiment": { "grid_db": [0, 6, 12], "w_max": 50000000.0, "tolerance": 500000.0 }
}"#;

pub fn write_fast_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, FAST_CONFIG).unwrap();
    path
}

pub fn hetbias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetbias"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}
