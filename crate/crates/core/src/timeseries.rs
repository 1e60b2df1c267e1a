//! Timestamped scalar sequences and the grid alignment used to compare them.
//!
//! Sensors in the lab log on their own clocks: temperatures every ~20 s,
//! tracked positions every few hundred seconds, resonance scans on yet
//! another cadence. Everything downstream (correlation, regression) wants
//! columns sampled at identical instants, so the central operation here is
//! [`align`], which interpolates a set of series onto one shared grid.

use crate::error::{Error, Result};

/// A named, strictly increasing sequence of `(timestamp, value)` samples.
///
/// Timestamps are seconds (epoch-based or run-relative; only differences
/// matter). Values are finite; NaN and infinities are rejected on entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from parallel vectors. Timestamps must be finite and
    /// strictly increasing, values finite, lengths equal and nonzero.
    pub fn new(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if times.len() != values.len() {
            return Err(Error::LengthMismatch { left: times.len(), right: values.len() });
        }
        if times.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        for (&t, &v) in times.iter().zip(&values) {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::NonFinite { name, timestamp: t });
            }
        }
        for w in times.windows(2) {
            if w[1] == w[0] {
                return Err(Error::DuplicateTimestamp { name, timestamp: w[0] });
            }
            if w[1] < w[0] {
                return Err(Error::UnorderedTimestamps { name, timestamp: w[1] });
            }
        }
        Ok(TimeSeries { name, times, values })
    }

    /// Builds a series from samples in arbitrary order. Sorting is stable;
    /// duplicate timestamps are still rejected.
    pub fn from_pairs(name: impl Into<String>, mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (times, values) = pairs.into_iter().unzip();
        Self::new(name, times, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// First and last timestamp.
    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Returns a copy under a new name; used when canonicalising ingested
    /// variable names.
    pub fn renamed(&self, name: impl Into<String>) -> TimeSeries {
        TimeSeries { name: name.into(), times: self.times.clone(), values: self.values.clone() }
    }

    /// Linear interpolation at `t`. Requires at least two samples and
    /// `t` inside the covered span; no extrapolation.
    pub fn interpolate_at(&self, t: f64) -> Result<f64> {
        if self.len() < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: self.len() });
        }
        let (start, end) = self.span();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        // Index of the first timestamp >= t; t >= start guarantees i >= 1
        // unless t hits the first sample exactly.
        let i = self.times.partition_point(|&x| x < t);
        if self.times[i] == t {
            return Ok(self.values[i]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// Keeps samples with `t0 <= t <= t1`. Bounds out of order are an
    /// error, as is an interval containing no samples.
    pub fn restrict(&self, t0: f64, t1: f64) -> Result<TimeSeries> {
        if t0 > t1 {
            return Err(Error::InvalidInterval { t0, t1 });
        }
        let lo = self.times.partition_point(|&t| t < t0);
        let hi = self.times.partition_point(|&t| t <= t1);
        if lo >= hi {
            return Err(Error::EmptyResult);
        }
        Ok(TimeSeries {
            name: self.name.clone(),
            times: self.times[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        })
    }

    /// Adds `offset` to every sample strictly after `t_break`, compensating a
    /// step introduced by an interruption (realignment, power cut). `t_break`
    /// must lie inside the covered span.
    pub fn correct_discontinuity(&self, t_break: f64, offset: f64) -> Result<TimeSeries> {
        let (start, end) = self.span();
        if !(t_break >= start && t_break <= end) {
            return Err(Error::OutOfRange { t: t_break, start, end });
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite { name: self.name.clone(), timestamp: t_break });
        }
        let values = self
            .iter()
            .map(|(t, v)| if t > t_break { v + offset } else { v })
            .collect();
        Ok(TimeSeries { name: self.name.clone(), times: self.times.clone(), values })
    }

    /// Splits the series wherever consecutive timestamps differ by more than
    /// `max_gap` seconds. Segments keep the original name. A non-positive
    /// `max_gap` is an error.
    pub fn split_at_gaps(&self, max_gap: f64) -> Result<Vec<TimeSeries>> {
        if !(max_gap > 0.0) {
            return Err(Error::NonPositive { quantity: "gap threshold" });
        }
        let mut segments = Vec::new();
        let mut seg_start = 0usize;
        for i in 1..self.len() {
            if self.times[i] - self.times[i - 1] > max_gap {
                segments.push(self.slice(seg_start, i));
                seg_start = i;
            }
        }
        segments.push(self.slice(seg_start, self.len()));
        Ok(segments)
    }

    fn slice(&self, lo: usize, hi: usize) -> TimeSeries {
        TimeSeries {
            name: self.name.clone(),
            times: self.times[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        }
    }
}

/// Several variables sampled on one shared, strictly increasing grid.
///
/// Produced by [`align`]; consumed by correlation and regression, which both
/// assume row `k` of every column refers to the same instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedFrame {
    times: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

impl AlignedFrame {
    /// Assembles a frame from a grid and named columns, enforcing the same
    /// shape rules [`align`] guarantees.
    pub fn from_columns(times: Vec<f64>, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::UnorderedTimestamps { name: "grid".into(), timestamp: w[1] });
            }
        }
        let mut seen: Vec<&str> = Vec::new();
        for (name, col) in &columns {
            if col.len() != times.len() {
                return Err(Error::LengthMismatch { left: times.len(), right: col.len() });
            }
            if seen.contains(&name.as_str()) {
                return Err(Error::DuplicateVariable { name: name.clone() });
            }
            seen.push(name);
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { name: name.clone(), timestamp: times[i] });
            }
        }
        Ok(AlignedFrame { times, columns })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.columns.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }

    /// Like [`AlignedFrame::column`] but failing with `MissingColumn`.
    pub fn require_column(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .ok_or_else(|| Error::MissingColumn { name: name.to_string() })
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns.iter().map(|(n, c)| (n.as_str(), c.as_slice()))
    }

    /// Keeps rows with `t0 <= t <= t1`.
    pub fn restrict_rows(&self, t0: f64, t1: f64) -> Result<AlignedFrame> {
        if t0 > t1 {
            return Err(Error::InvalidInterval { t0, t1 });
        }
        let lo = self.times.partition_point(|&t| t < t0);
        let hi = self.times.partition_point(|&t| t <= t1);
        if lo >= hi {
            return Err(Error::EmptyResult);
        }
        let columns = self
            .columns
            .iter()
            .map(|(n, c)| (n.clone(), c[lo..hi].to_vec()))
            .collect();
        Ok(AlignedFrame { times: self.times[lo..hi].to_vec(), columns })
    }

    /// Reconstructs one column as a standalone series.
    pub fn column_series(&self, name: &str) -> Result<TimeSeries> {
        let col = self.require_column(name)?;
        TimeSeries::new(name, self.times.clone(), col.to_vec())
    }
}

/// Interpolates every input series onto one shared grid.
///
/// The grid is restricted to the common span (latest start to earliest end),
/// which must have positive length. With `grid = None` the grid is the union
/// of all input timestamps inside that span; an explicit grid must be
/// strictly increasing and lie inside the common span. Each series needs two
/// samples or more so that interpolation is defined everywhere.
pub fn align(series: &[&TimeSeries], grid: Option<&[f64]>) -> Result<AlignedFrame> {
    if series.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut start = f64::NEG_INFINITY;
    let mut end = f64::INFINITY;
    for s in series {
        if s.len() < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: s.len() });
        }
        let (s0, s1) = s.span();
        start = start.max(s0);
        end = end.min(s1);
    }
    if !(start < end) {
        return Err(Error::NoOverlap);
    }

    let grid: Vec<f64> = match grid {
        Some(g) => {
            if g.is_empty() {
                return Err(Error::EmptyResult);
            }
            for w in g.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::UnorderedTimestamps { name: "grid".into(), timestamp: w[1] });
                }
            }
            if g[0] < start || *g.last().unwrap() > end {
                let bad = if g[0] < start { g[0] } else { *g.last().unwrap() };
                return Err(Error::OutOfRange { t: bad, start, end });
            }
            g.to_vec()
        }
        None => {
            let mut g: Vec<f64> = series
                .iter()
                .flat_map(|s| s.times().iter().copied())
                .filter(|&t| t >= start && t <= end)
                .collect();
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        }
    };

    let mut columns = Vec::with_capacity(series.len());
    for s in series {
        if columns.iter().any(|(n, _): &(String, Vec<f64>)| n == s.name()) {
            return Err(Error::DuplicateVariable { name: s.name().to_string() });
        }
        let col = grid
            .iter()
            .map(|&t| s.interpolate_at(t))
            .collect::<Result<Vec<f64>>>()?;
        columns.push((s.name().to_string(), col));
    }
    Ok(AlignedFrame { times: grid, columns })
}

/// Rescales values to `[0, 1]` by min-max: `(v - min) / (max - min)`.
/// Constant input has zero range and is rejected.
pub fn normalize_unit(values: &[f64]) -> Result<Vec<f64>> {
    normalize_named(values, "values")
}

pub(crate) fn normalize_named(values: &[f64], name: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::DegenerateRange { name: name.to_string() });
    }
    Ok(values.iter().map(|v| (v - min) / (max - min)).collect())
}
