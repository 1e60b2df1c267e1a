//! CSV input and output for time series and derived tables.
//!
//! Two on-disk layouts are accepted for series data, both with a header:
//!
//! * narrow: `timestamp,value`, the variable named after the file stem;
//! * wide: `timestamp,<var1>,<var2>,...`, one column per variable, empty
//!   cells meaning "no sample at this instant".
//!
//! Timestamps are either epoch seconds (any float) or ISO-8601 datetimes;
//! datetimes are converted to epoch seconds on read. All numeric output
//! uses the shortest representation that round-trips the value.

use std::path::Path;

use chrono::{DateTime, NaiveDateTime};

use crate::correlation::CorrelationMatrix;
use crate::driftanalysis::DriftReport;
use crate::error::{Error, Result};
use crate::timeseries::{AlignedFrame, TimeSeries};

/// Epoch seconds from a timestamp field: a float, an RFC 3339 datetime, or
/// a naive `YYYY-MM-DD[T ]HH:MM:SS[.frac]` datetime read as UTC.
pub fn parse_timestamp(field: &str, line: usize) -> Result<f64> {
    let field = field.trim();
    if let Ok(v) = field.parse::<f64>() {
        return Ok(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(field) {
        return Ok(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(field, fmt) {
            let dt = naive.and_utc();
            return Ok(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
        }
    }
    Err(Error::Parse {
        line,
        message: format!("'{field}' is neither epoch seconds nor an ISO-8601 datetime"),
    })
}

fn parse_value(field: &str, column: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("column '{column}': '{field}' is not a number"),
    })
}

/// Parses CSV text holding series data. `stem` names the variable when the
/// file uses the narrow layout. Column order of the input is preserved.
pub fn read_series_str(text: &str, stem: &str) -> Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    if headers.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "need a timestamp column and at least one value column".into(),
        });
    }
    if !headers[0].eq_ignore_ascii_case("timestamp") && !headers[0].eq_ignore_ascii_case("time") {
        return Err(Error::Parse {
            line: 1,
            message: format!("first column must be 'timestamp', got '{}'", &headers[0]),
        });
    }
    let names: Vec<String> = if headers.len() == 2 && headers[1].eq_ignore_ascii_case("value") {
        vec![stem.to_string()]
    } else {
        headers.iter().skip(1).map(String::from).collect()
    };
    let mut pairs: Vec<Vec<(f64, f64)>> = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, got {}", headers.len(), record.len()),
            });
        }
        let t = parse_timestamp(&record[0], line)?;
        for (idx, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                continue;
            }
            let v = parse_value(field, &names[idx], line)?;
            pairs[idx].push((t, v));
        }
    }
    names
        .iter()
        .zip(pairs)
        .map(|(name, p)| {
            if p.is_empty() {
                Err(Error::EmptyResult)
            } else {
                TimeSeries::from_pairs(name.clone(), p)
            }
        })
        .collect()
}

/// Reads series from a CSV file, naming narrow-format data after the stem.
pub fn read_series_path(path: &Path) -> Result<Vec<TimeSeries>> {
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("value");
    read_series_str(&text, stem)
}

/// CSV text in the narrow layout for a single series.
pub fn render_narrow_csv(series: &TimeSeries) -> String {
    let mut out = String::from("timestamp,value\n");
    for (t, v) in series.iter() {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

/// CSV text in the wide layout for an aligned frame.
pub fn render_wide_csv(frame: &AlignedFrame) -> String {
    let mut out = String::from("timestamp");
    for name in frame.variable_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let columns: Vec<(&str, &[f64])> = frame.columns().collect();
    for (i, t) in frame.times().iter().enumerate() {
        out.push_str(&t.to_string());
        for (_, col) in &columns {
            out.push(',');
            out.push_str(&col[i].to_string());
        }
        out.push('\n');
    }
    out
}

/// Square correlation table, rows labelled by the reference variable.
pub fn render_matrix_csv(matrix: &CorrelationMatrix) -> String {
    let mut out = String::from("variable");
    for name in matrix.variables() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, name) in matrix.variables().iter().enumerate() {
        out.push_str(name);
        for j in 0..matrix.variables().len() {
            out.push(',');
            out.push_str(&matrix.get(i, j).to_string());
        }
        out.push('\n');
    }
    out
}

/// Flat `quantity,axis,value,unit` table for a tracking report.
pub fn render_report_csv(report: &DriftReport) -> String {
    let mut out = String::from("quantity,axis,value,unit\n");
    for (quantity, axis, value, unit) in report.csv_rows() {
        out.push_str(&format!("{quantity},{axis},{value},{unit}\n"));
    }
    out
}

/// Inverse of [`render_report_csv`], used to re-render stored reports.
pub fn parse_report_csv(text: &str) -> Result<DriftReport> {
    let mut report = DriftReport {
        rates: Vec::new(),
        exit_thresholds: Vec::new(),
        half_contrast_threshold: None,
        residual_stats: Vec::new(),
        in_window_fraction: Vec::new(),
    };
    let mut partial: Vec<(String, crate::regression::ResidualStats)> = Vec::new();
    let stats_of = |list: &mut Vec<(String, crate::regression::ResidualStats)>, axis: &str| {
        if let Some(i) = list.iter().position(|(a, _)| a == axis) {
            i
        } else {
            list.push((
                axis.to_string(),
                crate::regression::ResidualStats { max: 0.0, mean: 0.0, rms: 0.0 },
            ));
            list.len() - 1
        }
    };
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim() != "quantity,axis,value,unit" {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected report header '{line}'"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let axis = fields[1].to_string();
        let value = parse_value(fields[2], "value", lineno)?;
        match fields[0] {
            "drift_rate" => report.rates.push((axis, value)),
            "window_exit_threshold" => report.exit_thresholds.push((axis, value)),
            "half_contrast_threshold" => report.half_contrast_threshold = Some(value),
            "residual_max" => {
                let i = stats_of(&mut partial, &axis);
                partial[i].1.max = value;
            }
            "residual_mean" => {
                let i = stats_of(&mut partial, &axis);
                partial[i].1.mean = value;
            }
            "residual_rms" => {
                let i = stats_of(&mut partial, &axis);
                partial[i].1.rms = value;
            }
            "in_window_fraction" => report.in_window_fraction.push((axis, value)),
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unknown report quantity '{other}'"),
                })
            }
        }
    }
    report.residual_stats = partial;
    Ok(report)
}

/// Writes a single series in the narrow layout.
pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    super::write_atomic(path, &render_narrow_csv(series))
}
