//! Synthetic drift scenarios with known ground truth.
//!
//! Generates the same kind of dataset the lab instruments log: two
//! temperature channels sampled every 20 s with sensor quantization, the
//! tracked emitter coordinates every 400 s, the resonance frequency on its
//! own ~191 s cadence, and a resonance contrast scan. Targets are produced
//! from the exact quadratic form the regression module fits, so a noiseless
//! run must round-trip the generating coefficients; that closure is the
//! oracle the acceptance suite is built on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::regression::design_row;
use crate::timeseries::TimeSeries;

const SECONDS_PER_DAY: f64 = 86400.0;

/// Spin-physics constants tying field strength to resonance frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub gyromagnetic_ghz_per_t: f64,
    pub zero_field_splitting_ghz: f64,
    pub magnetic_field_t: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            gyromagnetic_ghz_per_t: 28.024,
            zero_field_splitting_ghz: 2.869,
            magnetic_field_t: 0.05,
        }
    }
}

impl PhysicalConstants {
    /// Lower spin transition at the bias field: splitting minus gamma*B.
    pub fn resonance_anchor_ghz(&self) -> f64 {
        self.zero_field_splitting_ghz - self.gyromagnetic_ghz_per_t * self.magnetic_field_t
    }
}

/// One temperature sensor: slow diurnal swing, linear trend, white noise,
/// and a least-count readout quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    pub base_c: f64,
    pub diurnal_amplitude_c: f64,
    pub diurnal_period_s: f64,
    pub trend_c_per_day: f64,
    pub noise_sigma_c: f64,
    pub least_count_c: f64,
    pub sample_interval_s: f64,
}

impl SensorParams {
    fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.least_count_c > 0.0) {
            return Err(Error::NonPositive { quantity: "least count" });
        }
        if !(self.sample_interval_s > 0.0) {
            return Err(Error::NonPositive { quantity: "sample interval" });
        }
        if !(self.diurnal_period_s > 0.0) {
            return Err(Error::NonPositive { quantity: "diurnal period" });
        }
        if self.noise_sigma_c < 0.0 {
            return Err(Error::NonFinite { name: name.into(), timestamp: 0.0 });
        }
        Ok(())
    }
}

/// A mid-run step on the position channels, as left behind by a tracking
/// interruption. The stored offsets are the repair offsets: the simulator
/// injects their negation after `t_break_s`, so applying
/// `correct_discontinuity` with these very offsets restores the clean run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discontinuity {
    pub t_break_s: f64,
    pub y_offset_um: f64,
    pub z_offset_um: f64,
}

impl Default for Discontinuity {
    fn default() -> Self {
        Discontinuity { t_break_s: 3.0 * SECONDS_PER_DAY, y_offset_um: -0.227, z_offset_um: 0.05 }
    }
}

/// Resonance contrast scan shape and sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiScanParams {
    pub center_ghz: f64,
    pub fwhm_mhz: f64,
    pub peak_contrast: f64,
    pub baseline: f64,
    pub scan_start_ghz: f64,
    pub scan_end_ghz: f64,
    pub points: usize,
    pub noise_fraction: f64,
}

impl Default for RabiScanParams {
    fn default() -> Self {
        RabiScanParams {
            center_ghz: 1.458,
            fwhm_mhz: 1.55,
            peak_contrast: 30.0,
            baseline: 0.0,
            scan_start_ghz: 1.456,
            scan_end_ghz: 1.460,
            points: 17,
            noise_fraction: 0.0,
        }
    }
}

/// Complete description of one synthetic run.
///
/// Ground-truth coefficients are in the raw-temperature basis, exactly what
/// `fit_quadratic` reports, so oracle comparisons need no transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub duration_days: f64,
    pub t1: SensorParams,
    pub t2: SensorParams,
    pub beta_x: [f64; 6],
    pub beta_y: [f64; 6],
    pub beta_z: [f64; 6],
    pub beta_nu: [f64; 6],
    pub position_noise_um: [f64; 3],
    pub freq_noise_mhz: f64,
    pub position_interval_s: f64,
    pub odmr_interval_s: f64,
    pub discontinuity: Option<Discontinuity>,
    /// Strength of a deliberate model violation: adds
    /// `mismatch_cubic * (local T2 slope) * (T2 - base)^3` to every target.
    pub mismatch_cubic: f64,
    pub rabi: RabiScanParams,
    pub seed: u64,
}

/// Converts centered coefficients (temperatures measured from `(m1, m2)`)
/// into the raw-temperature basis.
fn expand_centered(beta: [f64; 6], m1: f64, m2: f64) -> [f64; 6] {
    [
        beta[0] - beta[1] * m1 - beta[2] * m2
            + beta[3] * m1 * m1
            + beta[4] * m1 * m2
            + beta[5] * m2 * m2,
        beta[1] - 2.0 * beta[3] * m1 - beta[4] * m2,
        beta[2] - beta[4] * m1 - 2.0 * beta[5] * m2,
        beta[3],
        beta[4],
        beta[5],
    ]
}

impl Default for ScenarioConfig {
    /// Ten days shaped like the lab logs: T2 swings over roughly
    /// [15.8, 20.0] degC, T1 stays inside [13.08, 13.31] degC, and the
    /// drift sensitivities reproduce the reference rates 1.533 / 0.178 /
    /// 0.682 um per degC and 517 kHz per degC.
    fn default() -> Self {
        let t1 = SensorParams {
            base_c: 13.145,
            diurnal_amplitude_c: 0.065,
            diurnal_period_s: SECONDS_PER_DAY,
            trend_c_per_day: 0.01,
            noise_sigma_c: 0.005,
            least_count_c: 0.01,
            sample_interval_s: 20.0,
        };
        let t2 = SensorParams {
            base_c: 17.65,
            diurnal_amplitude_c: 1.85,
            diurnal_period_s: SECONDS_PER_DAY,
            trend_c_per_day: 0.05,
            noise_sigma_c: 0.04,
            least_count_c: 0.02,
            sample_interval_s: 20.0,
        };
        let (m1, m2) = (t1.base_c, t2.base_c);
        // Every coefficient is nonzero so relative recovery checks are well
        // defined, and the Y/Z offsets keep those traces inside one floating
        // point binade; then the discontinuity repair is bit-exact.
        let beta_x = expand_centered([5.0, -0.08, -1.533, 0.004, 0.005, 0.01], m1, m2);
        let beta_y = expand_centered([3.0, 0.03, 0.178, -0.002, -0.002, -0.004], m1, m2);
        let beta_z = expand_centered([12.0, -0.15, -0.682, 0.006, 0.008, 0.015], m1, m2);
        let nu0 = PhysicalConstants::default().resonance_anchor_ghz();
        let beta_nu = expand_centered([nu0, 2.0e-4, -5.17e-4, -5.0e-6, -1.0e-5, 2.0e-5], m1, m2);
        ScenarioConfig {
            duration_days: 10.0,
            t1,
            t2,
            beta_x,
            beta_y,
            beta_z,
            beta_nu,
            position_noise_um: [0.02, 0.02, 0.05],
            freq_noise_mhz: 0.02,
            position_interval_s: 400.0,
            odmr_interval_s: 191.0,
            discontinuity: None,
            mismatch_cubic: 0.0,
            rabi: RabiScanParams::default(),
            seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn duration_seconds(&self) -> f64 {
        self.duration_days * SECONDS_PER_DAY
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_days > 0.0) {
            return Err(Error::NonPositive { quantity: "duration" });
        }
        self.t1.validate("t1")?;
        self.t2.validate("t2")?;
        if !(self.position_interval_s > 0.0) {
            return Err(Error::NonPositive { quantity: "position interval" });
        }
        if !(self.odmr_interval_s > 0.0) {
            return Err(Error::NonPositive { quantity: "odmr interval" });
        }
        if self.rabi.points < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: self.rabi.points });
        }
        if !(self.rabi.scan_end_ghz > self.rabi.scan_start_ghz) {
            return Err(Error::InvalidInterval {
                t0: self.rabi.scan_start_ghz,
                t1: self.rabi.scan_end_ghz,
            });
        }
        Ok(())
    }

    /// Ground-truth coefficients by target name.
    pub fn beta(&self, target: &str) -> Option<[f64; 6]> {
        match target {
            "X" => Some(self.beta_x),
            "Y" => Some(self.beta_y),
            "Z" => Some(self.beta_z),
            "nu_res" => Some(self.beta_nu),
            _ => None,
        }
    }

    /// Local sensitivity of a target to T2 at the sensor base temperatures;
    /// the nominal drift rate per degC in the target's storage unit.
    pub fn nominal_t2_rate(&self, target: &str) -> Option<f64> {
        self.beta(target).map(|b| {
            b[2] + b[4] * self.t1.base_c + 2.0 * b[5] * self.t2.base_c
        })
    }
}

/// Distinct noise streams of one seeded generator, so adding or removing
/// one variable never shifts another variable's draws.
enum Stream {
    T1 = 1,
    T2 = 2,
    X = 3,
    Y = 4,
    Z = 5,
    Nu = 6,
    Rabi = 7,
}

fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Nearest integer multiple of `least_count`; exact half-steps round away
/// from zero. The tie test tolerates the tiny division error that puts an
/// exact half a few ulps off 0.5.
pub fn quantize(value: f64, least_count: f64) -> f64 {
    assert!(least_count > 0.0, "least count must be positive");
    let q = value / least_count;
    let floor = q.floor();
    let frac = q - floor;
    let steps = if (frac - 0.5).abs() <= 1e-9 {
        if q >= 0.0 {
            floor + 1.0
        } else {
            floor
        }
    } else {
        q.round()
    };
    steps * least_count
}

fn sensor_series(
    name: &str,
    params: &SensorParams,
    duration_s: f64,
    seed: u64,
    stream: Stream,
) -> Result<TimeSeries> {
    let mut rng = stream_rng(seed, stream);
    let noise = Normal::new(0.0, params.noise_sigma_c)
        .map_err(|_| Error::NonPositive { quantity: "noise sigma" })?;
    let n = (duration_s / params.sample_interval_s).floor() as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * params.sample_interval_s;
        let raw = params.base_c
            + params.diurnal_amplitude_c
                * (2.0 * std::f64::consts::PI * t / params.diurnal_period_s).sin()
            + params.trend_c_per_day * (t / SECONDS_PER_DAY)
            + noise.sample(&mut rng);
        times.push(t);
        values.push(quantize(raw, params.least_count_c));
    }
    TimeSeries::new(name, times, values)
}

/// Both temperature channels over the configured duration.
pub fn simulate_temperatures(config: &ScenarioConfig) -> Result<(TimeSeries, TimeSeries)> {
    config.validate()?;
    let duration = config.duration_seconds();
    let t1 = sensor_series("T1", &config.t1, duration, config.seed, Stream::T1)?;
    let t2 = sensor_series("T2", &config.t2, duration, config.seed, Stream::T2)?;
    Ok((t1, t2))
}

#[allow(clippy::too_many_arguments)]
fn target_series(
    name: &str,
    beta: &[f64; 6],
    interval_s: f64,
    noise_sigma: f64,
    config: &ScenarioConfig,
    t1: &TimeSeries,
    t2: &TimeSeries,
    stream: Stream,
) -> Result<TimeSeries> {
    let mut rng = stream_rng(config.seed, stream);
    let noise = Normal::new(0.0, noise_sigma)
        .map_err(|_| Error::NonPositive { quantity: "noise sigma" })?;
    let start = t1.span().0.max(t2.span().0);
    let end = t1.span().1.min(t2.span().1);
    let mismatch_slope = config.mismatch_cubic
        * (beta[2] + beta[4] * config.t1.base_c + 2.0 * beta[5] * config.t2.base_c);
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * interval_s;
        if t > end || t > config.duration_seconds() {
            break;
        }
        k += 1;
        if t < start {
            continue;
        }
        let v1 = t1.interpolate_at(t)?;
        let v2 = t2.interpolate_at(t)?;
        let row = design_row(v1, v2);
        let mut value: f64 = row.iter().zip(beta).map(|(r, b)| r * b).sum();
        value += mismatch_slope * (v2 - config.t2.base_c).powi(3);
        value += noise.sample(&mut rng);
        times.push(t);
        values.push(value);
    }
    TimeSeries::new(name, times, values)
}

/// All four drift targets computed from the (already noisy, quantized)
/// temperature series interpolated to each target's own sampling instants.
pub fn simulate_targets(
    config: &ScenarioConfig,
    t1: &TimeSeries,
    t2: &TimeSeries,
) -> Result<[TimeSeries; 4]> {
    config.validate()?;
    let x = target_series(
        "X",
        &config.beta_x,
        config.position_interval_s,
        config.position_noise_um[0],
        config,
        t1,
        t2,
        Stream::X,
    )?;
    let mut y = target_series(
        "Y",
        &config.beta_y,
        config.position_interval_s,
        config.position_noise_um[1],
        config,
        t1,
        t2,
        Stream::Y,
    )?;
    let mut z = target_series(
        "Z",
        &config.beta_z,
        config.position_interval_s,
        config.position_noise_um[2],
        config,
        t1,
        t2,
        Stream::Z,
    )?;
    let nu = target_series(
        "nu_res",
        &config.beta_nu,
        config.odmr_interval_s,
        config.freq_noise_mhz * 1e-3,
        config,
        t1,
        t2,
        Stream::Nu,
    )?;
    if let Some(d) = config.discontinuity {
        // Inject the negated repair offsets; see Discontinuity.
        y = y.correct_discontinuity(d.t_break_s, -d.y_offset_um)?;
        z = z.correct_discontinuity(d.t_break_s, -d.z_offset_um)?;
    }
    Ok([x, y, z, nu])
}

/// Contrast-versus-frequency scan: a Lorentzian with optional multiplicative
/// noise, sampled uniformly over the scan interval.
pub fn simulate_rabi_scan(config: &ScenarioConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    config.validate()?;
    let p = &config.rabi;
    let mut rng = stream_rng(config.seed, Stream::Rabi);
    let noise = Normal::new(0.0, 1.0).map_err(|_| Error::NonPositive { quantity: "noise" })?;
    let params = [
        p.center_ghz,
        p.fwhm_mhz * 1e-3,
        p.peak_contrast,
        p.baseline,
    ];
    let mut freqs = Vec::with_capacity(p.points);
    let mut contrast = Vec::with_capacity(p.points);
    for i in 0..p.points {
        let f = p.scan_start_ghz
            + (p.scan_end_ghz - p.scan_start_ghz) * i as f64 / (p.points - 1) as f64;
        let mut v = crate::curvefit::lorentzian_eval(&params, f);
        if p.noise_fraction != 0.0 {
            v *= 1.0 + p.noise_fraction * noise.sample(&mut rng);
        }
        freqs.push(f);
        contrast.push(v);
    }
    Ok((freqs, contrast))
}

/// Everything one scenario produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub t1: TimeSeries,
    pub t2: TimeSeries,
    pub x: TimeSeries,
    pub y: TimeSeries,
    pub z: TimeSeries,
    pub nu_res: TimeSeries,
    pub rabi_freq_ghz: Vec<f64>,
    pub rabi_contrast: Vec<f64>,
}

impl SimulatedDataset {
    pub fn series(&self) -> [&TimeSeries; 6] {
        [&self.t1, &self.t2, &self.x, &self.y, &self.z, &self.nu_res]
    }

    pub fn target_series(&self) -> [&TimeSeries; 4] {
        [&self.x, &self.y, &self.z, &self.nu_res]
    }
}

/// Runs the full scenario: temperatures, drift targets, resonance scan.
pub fn simulate_scenario(config: &ScenarioConfig) -> Result<SimulatedDataset> {
    let (t1, t2) = simulate_temperatures(config)?;
    let [x, y, z, nu_res] = simulate_targets(config, &t1, &t2)?;
    let (rabi_freq_ghz, rabi_contrast) = simulate_rabi_scan(config)?;
    Ok(SimulatedDataset { t1, t2, x, y, z, nu_res, rabi_freq_ghz, rabi_contrast })
}

/// A copy of the config with every stochastic term switched off; the
/// deterministic regime used for oracle round-trips.
pub fn noiseless(config: &ScenarioConfig) -> ScenarioConfig {
    let mut c = config.clone();
    c.t1.noise_sigma_c = 0.0;
    c.t2.noise_sigma_c = 0.0;
    c.position_noise_um = [0.0; 3];
    c.freq_noise_mhz = 0.0;
    c.rabi.noise_fraction = 0.0;
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvefit::{fit_lorentzian, fit_sine};
    use crate::regression::fit_series;
    use approx::assert_relative_eq;

    #[test]
    fn quantize_examples() {
        assert_relative_eq!(quantize(13.084, 0.01), 13.08, max_relative = 1e-12);
        assert_relative_eq!(quantize(17.53, 0.02), 17.54, max_relative = 1e-12);
        assert_relative_eq!(quantize(-0.015, 0.01), -0.02, max_relative = 1e-12);
        assert_eq!(quantize(0.0, 0.01), 0.0);
        assert_relative_eq!(quantize(1.25, 0.5), 1.5, max_relative = 1e-12);
        assert_relative_eq!(quantize(-1.25, 0.5), -1.5, max_relative = 1e-12);
    }

    #[test]
    fn quantize_error_bounded_by_half_step() {
        for k in 0..1000 {
            let v = -3.0 + 0.0061 * k as f64;
            let q = quantize(v, 0.02);
            assert!(
                (q - v).abs() <= 0.01 + 1e-12,
                "quantize({v}) = {q} moved more than half a step"
            );
        }
    }

    #[test]
    fn flat_sensor_is_constant_at_quantized_base() {
        let mut config = ScenarioConfig::default();
        config.duration_days = 0.01;
        config.t1.diurnal_amplitude_c = 0.0;
        config.t1.trend_c_per_day = 0.0;
        config.t1.noise_sigma_c = 0.0;
        config.t1.base_c = 13.1234;
        let (t1, _) = simulate_temperatures(&config).unwrap();
        let expect = quantize(13.1234, 0.01);
        assert!(t1.values().iter().all(|&v| v == expect));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let config = ScenarioConfig { duration_days: 0.2, ..ScenarioConfig::default() };
        let a = simulate_scenario(&config).unwrap();
        let b = simulate_scenario(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cadence_is_exact() {
        let config = ScenarioConfig { duration_days: 0.5, ..ScenarioConfig::default() };
        let data = simulate_scenario(&config).unwrap();
        for w in data.t2.times().windows(2) {
            assert_eq!(w[1] - w[0], 20.0);
        }
        for w in data.x.times().windows(2) {
            assert_eq!(w[1] - w[0], 400.0);
        }
        for w in data.nu_res.times().windows(2) {
            assert_eq!(w[1] - w[0], 191.0);
        }
    }

    #[test]
    fn default_temperature_envelopes() {
        let config = ScenarioConfig::default();
        let (t1, t2) = simulate_temperatures(&config).unwrap();
        let min = |s: &TimeSeries| s.values().iter().copied().fold(f64::INFINITY, f64::min);
        let max = |s: &TimeSeries| s.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((min(&t2) - 15.8).abs() < 0.3, "T2 min {}", min(&t2));
        assert!((max(&t2) - 20.0).abs() < 0.3, "T2 max {}", max(&t2));
        assert!((min(&t1) - 13.08).abs() < 0.1, "T1 min {}", min(&t1));
        assert!((max(&t1) - 13.31).abs() < 0.1, "T1 max {}", max(&t1));
    }

    #[test]
    fn noiseless_round_trip_recovers_betas() {
        let config = noiseless(&ScenarioConfig { duration_days: 4.0, ..Default::default() });
        let data = simulate_scenario(&config).unwrap();
        for target in data.target_series() {
            let truth = config.beta(target.name()).unwrap();
            let model = fit_series(&data.t1, &data.t2, target, None).unwrap();
            // Conditioning of the raw-basis expansion leaves ~1e-12 absolute
            // error on coefficients that are exactly zero, so the tolerance
            // is anchored to the size of the coefficient vector.
            let anchor = truth.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for (got, want) in model.coefficients.iter().zip(&truth) {
                assert!(
                    (got - want).abs() < 1e-9 * anchor.max(1.0),
                    "{}: {got} vs {want}",
                    target.name()
                );
            }
        }
    }

    #[test]
    fn default_x_rate_consistent_with_reference_value() {
        let data = simulate_scenario(&ScenarioConfig::default()).unwrap();
        let rate = crate::driftanalysis::drift_rate(&data.x, &data.t2).unwrap();
        assert!(
            (rate.abs() - 1.533).abs() / 1.533 < 0.05,
            "X rate {rate} too far from 1.533"
        );
        assert!(rate < 0.0, "X should anticorrelate with T2");
    }

    #[test]
    fn discontinuity_repair_restores_clean_run_exactly() {
        let base = ScenarioConfig { duration_days: 5.0, ..ScenarioConfig::default() };
        let broken_config = ScenarioConfig {
            discontinuity: Some(Discontinuity::default()),
            ..base.clone()
        };
        let clean = simulate_scenario(&base).unwrap();
        let broken = simulate_scenario(&broken_config).unwrap();
        let d = Discontinuity::default();
        assert_ne!(clean.y, broken.y);
        let repaired_y = broken
            .y
            .correct_discontinuity(d.t_break_s, d.y_offset_um)
            .unwrap();
        let repaired_z = broken
            .z
            .correct_discontinuity(d.t_break_s, d.z_offset_um)
            .unwrap();
        assert_eq!(repaired_y, clean.y);
        assert_eq!(repaired_z, clean.z);
        assert_eq!(broken.x, clean.x);
    }

    #[test]
    fn rabi_scan_noiseless_round_trip() {
        let config = ScenarioConfig::default();
        let (freqs, contrast) = simulate_rabi_scan(&config).unwrap();
        assert_eq!(freqs.len(), 17);
        assert_eq!(freqs[0], 1.456);
        assert_eq!(*freqs.last().unwrap(), 1.460);
        let fit = fit_lorentzian(&freqs, &contrast).unwrap();
        assert_relative_eq!(fit.fwhm_mhz, 1.55, max_relative = 1e-6);
        assert_relative_eq!(fit.center_ghz, 1.458, max_relative = 1e-6);
    }

    #[test]
    fn rabi_scan_flat_when_peakless() {
        let mut config = ScenarioConfig::default();
        config.rabi.peak_contrast = 0.0;
        config.rabi.baseline = 2.5;
        let (_, contrast) = simulate_rabi_scan(&config).unwrap();
        assert!(contrast.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn rabi_scan_with_noise_recovers_width_within_five_percent() {
        let mut config = ScenarioConfig::default();
        config.rabi.noise_fraction = 0.01;
        let (freqs, contrast) = simulate_rabi_scan(&config).unwrap();
        let fit = fit_lorentzian(&freqs, &contrast).unwrap();
        assert!(
            (fit.fwhm_mhz - 1.55).abs() / 1.55 < 0.05,
            "fwhm {}",
            fit.fwhm_mhz
        );
    }

    #[test]
    fn model_mismatch_degrades_held_out_predictions() {
        let mut config = noiseless(&ScenarioConfig::default());
        config.duration_days = 6.0;
        config.mismatch_cubic = 0.05;
        let data = simulate_scenario(&config).unwrap();
        let split = 2.5 * SECONDS_PER_DAY;
        let model = fit_series(&data.t1, &data.t2, &data.x, Some(split)).unwrap();
        let frame =
            crate::regression::frame_on_target_grid(&data.t1, &data.t2, &data.x).unwrap();
        let held_out = frame.restrict_rows(split, f64::INFINITY).unwrap();
        let res = crate::regression::residual_series(&model, &held_out).unwrap();
        assert!(
            res.stats.max > 1e-4,
            "cubic mismatch should leave visible residuals, max {}",
            res.stats.max
        );
    }

    #[test]
    fn simulated_sine_trace_round_trips_through_fit() {
        // A synthetic driven-oscillation trace in the same shape rabi-fit
        // consumes: time in seconds, signal with positive offset.
        let t: Vec<f64> = (0..240).map(|k| k as f64 * 5e-9).collect();
        let p = [0.12, 4.2e6, 1.1, 0.8];
        let y: Vec<f64> = t.iter().map(|&ti| crate::curvefit::sine_eval(&p, ti)).collect();
        let fit = fit_sine(&t, &y).unwrap();
        assert_relative_eq!(fit.amplitude, 0.12, max_relative = 1e-6);
        assert_relative_eq!(fit.frequency, 4.2e6, max_relative = 1e-6);
        let contrast = crate::curvefit::rabi_contrast(&fit).unwrap();
        assert_relative_eq!(contrast, 30.0, max_relative = 1e-5);
    }
}
