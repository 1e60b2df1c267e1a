//! Python bindings for the drift-tracking library.
//!
//! Exposes the sampled-series and aligned-frame containers, the quadratic
//! temperature-to-drift model, the sine and Lorentzian fitters, and the
//! scenario simulator. Errors surface as `ValueError` carrying the
//! library's stable error code.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nvtrack::curvefit;
use nvtrack::driftanalysis::{self, TrackingWindow};
use nvtrack::io::csvio;
use nvtrack::io::model as modelio;
use nvtrack::regression::{self, QuadraticModel};
use nvtrack::simulator::{self, ScenarioConfig};
use nvtrack::{correlation, AlignedFrame};

fn err(e: nvtrack::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.code()))
}

/// A named, strictly time-ordered sequence of samples.
#[pyclass(name = "TimeSeries", frozen)]
struct Series {
    inner: nvtrack::TimeSeries,
}

#[pymethods]
impl Series {
    #[new]
    fn new(name: &str, times: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        Ok(Series { inner: nvtrack::TimeSeries::new(name, times, values).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn span(&self) -> (f64, f64) {
        self.inner.span()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let (a, b) = self.inner.span();
        format!(
            "TimeSeries(name='{}', n={}, span=({a}, {b}))",
            self.inner.name(),
            self.inner.len()
        )
    }

    /// Piecewise-linear value at `t`; `t` must lie inside the span.
    fn interpolate_at(&self, t: f64) -> PyResult<f64> {
        self.inner.interpolate_at(t).map_err(err)
    }

    /// Samples with `t0 <= t <= t1`.
    fn restrict(&self, t0: f64, t1: f64) -> PyResult<Series> {
        Ok(Series { inner: self.inner.restrict(t0, t1).map_err(err)? })
    }

    /// Adds `offset` to every sample at or after `t_break`.
    fn correct_discontinuity(&self, t_break: f64, offset: f64) -> PyResult<Series> {
        Ok(Series { inner: self.inner.correct_discontinuity(t_break, offset).map_err(err)? })
    }

    /// Splits into contiguous segments wherever consecutive samples are
    /// more than `max_gap` apart.
    fn split_at_gaps(&self, max_gap: f64) -> PyResult<Vec<Series>> {
        Ok(self
            .inner
            .split_at_gaps(max_gap)
            .map_err(err)?
            .into_iter()
            .map(|inner| Series { inner })
            .collect())
    }

    /// Two-column `timestamp,value` CSV text with full-precision values.
    fn to_csv(&self) -> String {
        csvio::render_narrow_csv(&self.inner)
    }
}

/// Several variables sampled on one shared time grid.
#[pyclass(name = "Frame", frozen)]
struct Frame {
    inner: AlignedFrame,
}

#[pymethods]
impl Frame {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn variable_names(&self) -> Vec<String> {
        self.inner.variable_names().iter().map(|s| s.to_string()).collect()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.require_column(name).map_err(err)?.to_vec())
    }

    fn column_series(&self, name: &str) -> PyResult<Series> {
        Ok(Series { inner: self.inner.column_series(name).map_err(err)? })
    }

    /// Rows with `t0 <= t <= t1`.
    fn restrict_rows(&self, t0: f64, t1: f64) -> PyResult<Frame> {
        Ok(Frame { inner: self.inner.restrict_rows(t0, t1).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Frame(rows={}, variables={:?})",
            self.inner.len(),
            self.inner.variable_names()
        )
    }
}

/// Quadratic two-temperature drift model for one target variable.
#[pyclass(name = "DriftModel", frozen)]
struct Model {
    inner: QuadraticModel,
}

#[pymethods]
impl Model {
    #[getter]
    fn target(&self) -> &str {
        &self.inner.target
    }

    /// Raw-basis coefficients `[b0, b1, b2, b3, b4, b5]` of
    /// `b0 + b1*T1 + b2*T2 + b3*T1^2 + b4*T1*T2 + b5*T2^2`.
    #[getter]
    fn coefficients(&self) -> [f64; 6] {
        self.inner.coefficients
    }

    #[getter]
    fn center(&self) -> (f64, f64) {
        self.inner.center
    }

    #[getter]
    fn n_train(&self) -> usize {
        self.inner.n_train
    }

    #[getter]
    fn rms_train(&self) -> f64 {
        self.inner.rms_train
    }

    #[getter]
    fn rank_deficient(&self) -> bool {
        self.inner.rank_deficient
    }

    fn predict(&self, t1: f64, t2: f64) -> f64 {
        self.inner.predict(t1, t2)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        modelio::save_model(path.as_ref(), &self.inner).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Model> {
        Ok(Model { inner: modelio::load_model(path.as_ref()).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "DriftModel(target='{}', n_train={}, rms_train={:.6})",
            self.inner.target, self.inner.n_train, self.inner.rms_train
        )
    }
}

/// Interpolates every series onto a shared grid (the union of sample
/// instants inside the common span unless `grid` is given).
#[pyfunction]
#[pyo3(signature = (series, grid=None))]
fn align(series: Vec<PyRef<Series>>, grid: Option<Vec<f64>>) -> PyResult<Frame> {
    let refs: Vec<&nvtrack::TimeSeries> = series.iter().map(|s| &s.inner).collect();
    Ok(Frame { inner: nvtrack::align(&refs, grid.as_deref()).map_err(err)? })
}

/// Correlation of two equally long samples via normalized slopes, in [-1, 1].
#[pyfunction]
fn slope_correlation(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    correlation::slope_correlation(&u, &v).map_err(err)
}

/// Pairwise correlations of every frame column: `(names, rows)` where
/// `rows[i][j]` correlates variable i (as reference) with variable j.
#[pyfunction]
fn correlation_matrix(frame: &Frame) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    let m = correlation::correlation_matrix(&frame.inner).map_err(err)?;
    Ok((m.variables().to_vec(), m.entries().to_vec()))
}

/// Least-squares quadratic fit of `target` against the frame's T1 and T2.
#[pyfunction]
fn fit_quadratic(frame: &Frame, target: &str) -> PyResult<Model> {
    Ok(Model { inner: regression::fit_quadratic(&frame.inner, target).map_err(err)? })
}

/// Fits `target` against the two temperature series on the target's own
/// grid, optionally truncating training at `train_until` seconds.
#[pyfunction]
#[pyo3(signature = (t1, t2, target, train_until=None))]
fn fit_series(
    t1: &Series,
    t2: &Series,
    target: &Series,
    train_until: Option<f64>,
) -> PyResult<Model> {
    Ok(Model {
        inner: regression::fit_series(&t1.inner, &t2.inner, &target.inner, train_until)
            .map_err(err)?,
    })
}

/// Signed drift rate of `target` per unit of `tref` (least-squares slope).
#[pyfunction]
fn drift_rate(target: &Series, tref: &Series) -> PyResult<f64> {
    driftanalysis::drift_rate(&target.inner, &tref.inner).map_err(err)
}

/// Temperature change that walks the emitter out of half the window.
#[pyfunction]
fn window_exit_threshold(rate: f64, window_size: f64) -> PyResult<f64> {
    driftanalysis::window_exit_threshold(rate, window_size).map_err(err)
}

/// Temperature change that detunes the resonance by half a linewidth.
#[pyfunction]
fn half_contrast_threshold(fwhm_mhz: f64, freq_rate_khz_per_c: f64) -> PyResult<f64> {
    driftanalysis::half_contrast_threshold(fwhm_mhz, freq_rate_khz_per_c).map_err(err)
}

/// Damped Gauss-Newton sine fit `amplitude*sin(2*pi*frequency*t+phase)+offset`.
#[pyfunction]
fn fit_sine<'py>(py: Python<'py>, t: Vec<f64>, y: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let fit = curvefit::fit_sine(&t, &y).map_err(err)?;
    let contrast = curvefit::rabi_contrast(&fit).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("amplitude", fit.amplitude)?;
    out.set_item("frequency_hz", fit.frequency)?;
    out.set_item("phase_rad", fit.phase)?;
    out.set_item("offset", fit.offset)?;
    out.set_item("rms_residual", fit.rms_residual)?;
    out.set_item("contrast_percent", contrast)?;
    Ok(out)
}

/// Damped Gauss-Newton Lorentzian fit of a resonance scan.
#[pyfunction]
fn fit_lorentzian<'py>(
    py: Python<'py>,
    freq_ghz: Vec<f64>,
    contrast: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let fit = curvefit::fit_lorentzian(&freq_ghz, &contrast).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("center_ghz", fit.center_ghz)?;
    out.set_item("fwhm_mhz", fit.fwhm_mhz)?;
    out.set_item("peak_contrast", fit.peak_height)?;
    out.set_item("baseline", fit.baseline)?;
    out.set_item("rms_residual", fit.rms_residual)?;
    Ok(out)
}

/// Scores saved models against a frame holding T1, T2 and the actual
/// targets. Returns rates, window-exit thresholds, residual statistics
/// and in-window fractions keyed like the report files.
#[pyfunction]
#[pyo3(signature = (models, frame, window=(1.0, 0.7, 3.0), fwhm_mhz=None))]
fn evaluate_tracking<'py>(
    py: Python<'py>,
    models: Vec<PyRef<Model>>,
    frame: &Frame,
    window: (f64, f64, f64),
    fwhm_mhz: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let inner: Vec<QuadraticModel> = models.iter().map(|m| m.inner.clone()).collect();
    let window = TrackingWindow::new(window.0, window.1, window.2).map_err(err)?;
    let report =
        driftanalysis::evaluate_tracking(&inner, &frame.inner, &window, fwhm_mhz).map_err(err)?;

    let out = PyDict::new(py);
    let rates = PyDict::new(py);
    for (k, v) in &report.rates {
        rates.set_item(k, *v)?;
    }
    out.set_item("rates", rates)?;
    let thresholds = PyDict::new(py);
    for (k, v) in &report.exit_thresholds {
        thresholds.set_item(k, *v)?;
    }
    out.set_item("exit_thresholds", thresholds)?;
    out.set_item("half_contrast_threshold", report.half_contrast_threshold)?;
    let stats = PyDict::new(py);
    for (k, s) in &report.residual_stats {
        let entry = PyDict::new(py);
        entry.set_item("max", s.max)?;
        entry.set_item("mean", s.mean)?;
        entry.set_item("rms", s.rms)?;
        stats.set_item(k, entry)?;
    }
    out.set_item("residual_stats", stats)?;
    let fractions = PyDict::new(py);
    for (k, v) in &report.in_window_fraction {
        fractions.set_item(k, *v)?;
    }
    out.set_item("in_window_fraction", fractions)?;
    Ok(out)
}

/// Generates the synthetic scenario. Returns a dict with one `TimeSeries`
/// per variable plus the resonance scan as `rabi_freq_ghz` and
/// `rabi_contrast` lists.
#[pyfunction]
#[pyo3(signature = (seed=None, duration_days=None, noiseless=false))]
fn simulate<'py>(
    py: Python<'py>,
    seed: Option<u64>,
    duration_days: Option<f64>,
    noiseless: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut config = ScenarioConfig::default();
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(days) = duration_days {
        config.duration_days = days;
    }
    if noiseless {
        config = simulator::noiseless(&config);
    }
    config.validate().map_err(err)?;
    let data = simulator::simulate_scenario(&config).map_err(err)?;
    let out = PyDict::new(py);
    for series in data.series() {
        out.set_item(series.name(), Series { inner: series.clone() })?;
    }
    out.set_item("rabi_freq_ghz", data.rabi_freq_ghz.clone())?;
    out.set_item("rabi_contrast", data.rabi_contrast.clone())?;
    Ok(out)
}

/// Reads an accepted CSV file (narrow or wide) into a list of series.
#[pyfunction]
fn read_series_csv(path: &str) -> PyResult<Vec<Series>> {
    Ok(csvio::read_series_path(path.as_ref())
        .map_err(err)?
        .into_iter()
        .map(|inner| Series { inner })
        .collect())
}

#[pymodule]
fn nvtrack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Series>()?;
    m.add_class::<Frame>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(align, m)?)?;
    m.add_function(wrap_pyfunction!(slope_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(fit_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(fit_series, m)?)?;
    m.add_function(wrap_pyfunction!(drift_rate, m)?)?;
    m.add_function(wrap_pyfunction!(window_exit_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(half_contrast_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(fit_sine, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lorentzian, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_tracking, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(read_series_csv, m)?)?;
    Ok(())
}
