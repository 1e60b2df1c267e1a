//! Drift rates per degree, tracking-window exit thresholds, and
//! prediction-quality reports.
//!
//! The central question: given how fast each channel drifts per degree of
//! room-temperature change, how much temperature change pushes the emitter
//! out of its scan window or detunes it past half contrast, and how well do
//! model predictions keep residuals inside the window?

use crate::correlation::slope_correlation;
use crate::error::{Error, Result};
use crate::regression::{residual_series, QuadraticModel, ResidualStats};
use crate::timeseries::{align, AlignedFrame, TimeSeries};

/// The scan volume within which the emitter must stay locatable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingWindow {
    pub size_x_um: f64,
    pub size_y_um: f64,
    pub size_z_um: f64,
}

impl TrackingWindow {
    pub fn new(size_x_um: f64, size_y_um: f64, size_z_um: f64) -> Result<TrackingWindow> {
        if !(size_x_um > 0.0 && size_y_um > 0.0 && size_z_um > 0.0) {
            return Err(Error::NonPositive { quantity: "tracking window size" });
        }
        Ok(TrackingWindow { size_x_um, size_y_um, size_z_um })
    }

    /// Window size along a named axis; `None` for non-position targets.
    pub fn axis_size(&self, axis: &str) -> Option<f64> {
        match axis {
            "X" => Some(self.size_x_um),
            "Y" => Some(self.size_y_um),
            "Z" => Some(self.size_z_um),
            _ => None,
        }
    }
}

impl Default for TrackingWindow {
    /// The confocal scan volume used throughout: 1 x 0.7 x 3 micrometers.
    fn default() -> Self {
        TrackingWindow { size_x_um: 1.0, size_y_um: 0.7, size_z_um: 3.0 }
    }
}

/// Signed drift rate of `target` per unit of `tref` (typically degC).
///
/// Magnitude is the ratio of total ranges, max minus min of each series
/// over its full record; the sign comes from the slope correlation of the
/// two series after alignment onto a shared grid.
pub fn drift_rate(target: &TimeSeries, tref: &TimeSeries) -> Result<f64> {
    let range = |s: &TimeSeries, name: &str| -> Result<f64> {
        let min = s.values().iter().copied().fold(f64::INFINITY, f64::min);
        let max = s.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max > min) {
            return Err(Error::DegenerateRange { name: name.to_string() });
        }
        Ok(max - min)
    };
    let magnitude = range(target, target.name())? / range(tref, tref.name())?;
    let frame = align(&[target, tref], None)?;
    let r = slope_correlation(
        frame.column(target.name()).unwrap(),
        frame.column(tref.name()).unwrap(),
    )?;
    Ok(if r >= 0.0 { magnitude } else { -magnitude })
}

/// Temperature change after which a centered emitter drifts past the window
/// edge: half the window size divided by the absolute drift rate.
pub fn window_exit_threshold(rate: f64, window_size: f64) -> Result<f64> {
    if !(window_size > 0.0) {
        return Err(Error::NonPositive { quantity: "window size" });
    }
    if rate == 0.0 {
        return Err(Error::ZeroRate);
    }
    Ok(window_size / 2.0 / rate.abs())
}

/// Temperature change detuning the drive by the half width at half maximum,
/// which halves the resonance contrast. `fwhm` in MHz, rate in kHz/degC.
pub fn half_contrast_threshold(fwhm_mhz: f64, freq_rate_khz_per_c: f64) -> Result<f64> {
    if !(fwhm_mhz > 0.0) {
        return Err(Error::NonPositive { quantity: "fwhm" });
    }
    if freq_rate_khz_per_c == 0.0 {
        return Err(Error::ZeroRate);
    }
    Ok(fwhm_mhz * 1e3 / 2.0 / freq_rate_khz_per_c.abs())
}

/// Prediction-quality summary across all modelled targets.
///
/// Rates are signed: micrometers per degC for the position axes, kHz per
/// degC for the resonance frequency. Map-like fields keep insertion order
/// (X, Y, Z, nu_res) for stable output.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub rates: Vec<(String, f64)>,
    pub exit_thresholds: Vec<(String, f64)>,
    pub half_contrast_threshold: Option<f64>,
    pub residual_stats: Vec<(String, ResidualStats)>,
    pub in_window_fraction: Vec<(String, f64)>,
}

impl DriftReport {
    fn rate_unit(target: &str) -> &'static str {
        if target == "nu_res" {
            "kHz_per_C"
        } else {
            "um_per_C"
        }
    }

    fn stat_unit(target: &str) -> &'static str {
        if target == "nu_res" {
            "GHz"
        } else {
            "um"
        }
    }

    /// Flat machine-readable rows: `(quantity, axis, value, unit)`.
    pub fn csv_rows(&self) -> Vec<(String, String, f64, String)> {
        let mut rows = Vec::new();
        for (t, r) in &self.rates {
            rows.push(("drift_rate".into(), t.clone(), *r, Self::rate_unit(t).into()));
        }
        for (t, v) in &self.exit_thresholds {
            rows.push(("window_exit_threshold".into(), t.clone(), *v, "C".into()));
        }
        if let Some(h) = self.half_contrast_threshold {
            rows.push(("half_contrast_threshold".into(), "nu_res".into(), h, "C".into()));
        }
        for (t, s) in &self.residual_stats {
            let unit = Self::stat_unit(t);
            rows.push(("residual_max".into(), t.clone(), s.max, unit.into()));
            rows.push(("residual_mean".into(), t.clone(), s.mean, unit.into()));
            rows.push(("residual_rms".into(), t.clone(), s.rms, unit.into()));
        }
        for (t, f) in &self.in_window_fraction {
            rows.push(("in_window_fraction".into(), t.clone(), *f, "1".into()));
        }
        rows
    }
}

impl std::fmt::Display for DriftReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "drift rates:")?;
        for (t, r) in &self.rates {
            writeln!(f, "  {t}: {r} {}", Self::rate_unit(t))?;
        }
        writeln!(f, "window exit thresholds:")?;
        for (t, v) in &self.exit_thresholds {
            writeln!(f, "  {t}: {v} C")?;
        }
        if let Some(h) = self.half_contrast_threshold {
            writeln!(f, "half contrast threshold: {h} C")?;
        }
        writeln!(f, "prediction residuals (|actual - predicted|):")?;
        for (t, s) in &self.residual_stats {
            writeln!(
                f,
                "  {t}: max {} mean {} rms {} {}",
                s.max,
                s.mean,
                s.rms,
                Self::stat_unit(t)
            )?;
        }
        writeln!(f, "fraction of samples inside half-window:")?;
        for (t, frac) in &self.in_window_fraction {
            writeln!(f, "  {t}: {frac}")?;
        }
        Ok(())
    }
}

/// Evaluates the fitted models over a frame of actual observations.
///
/// For every model target present in the frame: absolute residual
/// statistics; for position axes additionally the fraction of rows whose
/// residual stays strictly inside the half window. Drift rates are taken
/// against the frame's `T2` column; `fwhm_mhz`, when given together with a
/// resonance-frequency model, fills the half-contrast threshold.
pub fn evaluate_tracking(
    models: &[QuadraticModel],
    frame: &AlignedFrame,
    window: &TrackingWindow,
    fwhm_mhz: Option<f64>,
) -> Result<DriftReport> {
    frame.require_column("T1")?;
    let t2 = frame.require_column("T2")?;
    if models.is_empty() {
        return Err(Error::EmptyResult);
    }

    let mut rates = Vec::new();
    let mut exit_thresholds = Vec::new();
    let mut residual_stats = Vec::new();
    let mut in_window = Vec::new();
    let mut half_contrast = None;

    for model in models {
        let actual = frame.require_column(&model.target)?;
        let res = residual_series(model, frame)?;
        residual_stats.push((model.target.clone(), res.stats));

        let range = |v: &[f64]| {
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - v.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let t_range = range(t2);
        let a_range = range(actual);
        if !(t_range > 0.0) {
            return Err(Error::DegenerateRange { name: "T2".into() });
        }
        if !(a_range > 0.0) {
            return Err(Error::DegenerateRange { name: model.target.clone() });
        }
        let magnitude = a_range / t_range;
        let sign = if slope_correlation(actual, t2)? >= 0.0 { 1.0 } else { -1.0 };
        let rate = sign
            * if model.target == "nu_res" {
                magnitude * 1e6 // GHz per degC to kHz per degC
            } else {
                magnitude
            };
        rates.push((model.target.clone(), rate));

        if let Some(size) = window.axis_size(&model.target) {
            exit_thresholds.push((model.target.clone(), window_exit_threshold(rate, size)?));
            let half = size / 2.0;
            let inside = res
                .series
                .values()
                .iter()
                .filter(|r| r.abs() < half)
                .count();
            in_window.push((
                model.target.clone(),
                inside as f64 / res.series.len() as f64,
            ));
        } else if model.target == "nu_res" {
            if let Some(fwhm) = fwhm_mhz {
                half_contrast = Some(half_contrast_threshold(fwhm, rate)?);
            }
        }
    }

    Ok(DriftReport {
        rates,
        exit_thresholds,
        half_contrast_threshold: half_contrast,
        residual_stats,
        in_window_fraction: in_window,
    })
}
