//! Predictive drift tracking for confocal single-emitter experiments.
//!
//! A tracked emitter wanders in X, Y, Z and its spin resonance shifts as the
//! lab breathes: table and room temperature swings move optics and bias
//! field. This crate ingests the logged sensor and tracking histories,
//! quantifies how tightly each drift channel follows temperature, fits a
//! quadratic temperature-to-drift model, and evaluates how well that model
//! would keep the emitter inside its tracking window without re-scanning.
//!
//! Module map:
//! - [`timeseries`]: timestamped sequences, interpolation, grid alignment
//! - [`correlation`]: normalized slope-based correlation measure and matrix
//! - [`regression`]: quadratic two-temperature least-squares drift model
//! - [`curvefit`]: damped Gauss-Newton sine and Lorentzian fits
//! - [`driftanalysis`]: drift rates, window-exit and linewidth thresholds
//! - [`simulator`]: synthetic sensor/drift scenarios with known ground truth
//! - [`io`]: CSV and key-value file formats shared with the command line

pub mod correlation;
pub mod curvefit;
pub mod driftanalysis;
pub mod error;
pub mod io;
pub mod regression;
pub mod simulator;
pub mod timeseries;

pub use error::{Error, Result};
pub use timeseries::{align, normalize_unit, AlignedFrame, TimeSeries};
