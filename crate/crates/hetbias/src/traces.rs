//! Trace CSV input and segment CSV output.
//!
//! Input header: `user_id,timestamp,lat,lon,rx_bytes`. Timestamps are
//! ISO-8601; an explicit offset is converted to UTC, a missing one is read
//! as UTC.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use hetbias_core::{MobilitySegment, TraceSample};
use serde::Serialize;

use crate::error::{CliError, MalformedRow, Result};

pub const TRACE_HEADER: [&str; 5] = ["user_id", "timestamp", "lat", "lon", "rx_bytes"];

/// Parsed samples plus the rows skipped in lenient mode.
#[derive(Debug, Clone, Default)]
pub struct TraceFile {
    pub samples: Vec<TraceSample>,
    pub skipped: Vec<MalformedRow>,
}

/// Milliseconds since the Unix epoch.
pub fn parse_timestamp(text: &str) -> Result<i64, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.with_timezone(&Utc).timestamp_millis());
    }
    for format in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(text, format) {
            return Ok(t.and_utc().timestamp_millis());
        }
    }
    Err(format!("timestamp `{text}` is not ISO-8601"))
}

/// RFC 3339 UTC with millisecond precision.
pub fn format_timestamp(ms: i64) -> String {
    DateTime::<Utc>::from_timestamp_millis(ms)
        .map(|t| t.to_rfc3339_opts(SecondsFormat::Millis, true))
        .unwrap_or_else(|| ms.to_string())
}

fn parse_row(record: &csv::StringRecord) -> Result<TraceSample, String> {
    if record.len() != TRACE_HEADER.len() {
        return Err(format!("expected 5 fields, found {}", record.len()));
    }
    let user_id = record[0].to_string();
    if user_id.is_empty() {
        return Err("empty user_id".into());
    }
    let number = |i: usize| -> Result<f64, String> {
        record[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{} `{}` is not a finite number", TRACE_HEADER[i], &record[i]))
    };
    let sample = TraceSample {
        user_id,
        timestamp_ms: parse_timestamp(&record[1])?,
        latitude: number(2)?,
        longitude: number(3)?,
        rx_bytes: record[4]
            .parse()
            .map_err(|_| format!("rx_bytes `{}` is not a non-negative integer", &record[4]))?,
    };
    sample.validate().map_err(|e| e.to_string())?;
    Ok(sample)
}

/// Reads a trace CSV. Malformed rows abort in `strict` mode (with every
/// offending line listed) and are skipped otherwise. An empty input yields
/// no samples.
pub fn read_traces<R: Read>(input: R, origin: &Path, strict: bool) -> Result<TraceFile> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| CliError::csv(origin, e))?.clone();
    let mut out = TraceFile::default();
    if header.is_empty() {
        return Ok(out);
    }
    if header.iter().ne(TRACE_HEADER) {
        return Err(CliError::TraceHeader(header.iter().collect::<Vec<_>>().join(",")));
    }
    for record in reader.records() {
        let record = record.map_err(|e| CliError::csv(origin, e))?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_row(&record) {
            Ok(sample) => out.samples.push(sample),
            Err(reason) => out.skipped.push(MalformedRow { line, reason }),
        }
    }
    if strict && !out.skipped.is_empty() {
        return Err(CliError::MalformedTrace(out.skipped));
    }
    Ok(out)
}

pub fn read_trace_file(path: &Path, strict: bool) -> Result<TraceFile> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_traces(std::io::BufReader::new(file), path, strict)
}

#[derive(Serialize)]
struct SegmentRow<'a> {
    user_id: &'a str,
    start: String,
    end: String,
    state: &'static str,
    velocity_kmh: f64,
    rx_bytes: u64,
}

pub fn write_segments<W: Write>(output: W, segments: &[MobilitySegment], origin: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    for s in segments {
        writer
            .serialize(SegmentRow {
                user_id: &s.user_id,
                start: format_timestamp(s.start_ms),
                end: format_timestamp(s.end_ms),
                state: s.state.name(),
                velocity_kmh: s.velocity,
                rx_bytes: s.rx_bytes,
            })
            .map_err(|e| CliError::csv(origin, e))?;
    }
    writer.flush().map_err(|e| CliError::io(origin, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("1970-01-01T00:00:00Z").unwrap(), 0);
        assert_eq!(parse_timestamp("1970-01-01T01:00:00+01:00").unwrap(), 0);
        assert_eq!(parse_timestamp("1970-01-01T00:05:00").unwrap(), 300_000);
        assert_eq!(parse_timestamp("1970-01-01 00:00:01.5").unwrap(), 1_500);
        assert!(parse_timestamp("yesterday").is_err());
        assert_eq!(format_timestamp(300_000), "1970-01-01T00:05:00.000Z");
    }

    const GOOD: &str = "user_id,timestamp,lat,lon,rx_bytes\n\
                        a,2015-03-01T00:00:00Z,37.5,127.0,0\n\
                        a,2015-03-01T00:05:00Z,37.5,127.0,1000\n";

    #[test]
    fn reads_rows() {
        let file = read_traces(GOOD.as_bytes(), Path::new("t"), true).unwrap();
        assert_eq!(file.samples.len(), 2);
        assert_eq!(file.samples[1].rx_bytes, 1000);
        assert_eq!(file.samples[1].timestamp_ms - file.samples[0].timestamp_ms, 300_000);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = format!("{GOOD}a,not-a-time,37.5,127.0,5\nb,2015-03-01T00:00:00Z,95,0,1\nc,2015-03-01T00:00:00Z,1,1\n");
        let lenient = read_traces(text.as_bytes(), Path::new("t"), false).unwrap();
        assert_eq!(lenient.samples.len(), 2);
        let lines: Vec<u64> = lenient.skipped.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![4, 5, 6]);

        let err = read_traces(text.as_bytes(), Path::new("t"), true).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4") && msg.contains("line 5") && msg.contains("line 6"), "{msg}");
    }

    #[test]
    fn empty_input_and_bad_header() {
        assert!(read_traces("".as_bytes(), Path::new("t"), true).unwrap().samples.is_empty());
        assert!(matches!(
            read_traces("id,time\n".as_bytes(), Path::new("t"), true),
            Err(CliError::TraceHeader(_))
        ));
    }
}
