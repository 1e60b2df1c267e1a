//! Scenario configuration files.
//!
//! A config file lists `key = value` overrides that are merged onto
//! [`ScenarioConfig::default`]; an empty file is a valid config. Unknown
//! keys are rejected so a typo cannot silently fall back to a default.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::keyvalue::{self, parse_f64, parse_f64_list, render_f64_list};
use crate::simulator::{ScenarioConfig, SensorParams};

pub const CONFIG_FORMAT: &str = "drift-scenario/1";

fn sensor_pairs(prefix: &str, s: &SensorParams, out: &mut Vec<(String, String)>) {
    out.push((format!("{prefix}.base_c"), s.base_c.to_string()));
    out.push((format!("{prefix}.amplitude_c"), s.diurnal_amplitude_c.to_string()));
    out.push((format!("{prefix}.period_s"), s.diurnal_period_s.to_string()));
    out.push((format!("{prefix}.trend_c_per_day"), s.trend_c_per_day.to_string()));
    out.push((format!("{prefix}.noise_sigma_c"), s.noise_sigma_c.to_string()));
    out.push((format!("{prefix}.least_count_c"), s.least_count_c.to_string()));
    out.push((format!("{prefix}.sample_interval_s"), s.sample_interval_s.to_string()));
}

pub fn render_config(config: &ScenarioConfig) -> String {
    let mut pairs: Vec<(String, String)> = vec![
        ("format".into(), CONFIG_FORMAT.into()),
        ("duration_days".into(), config.duration_days.to_string()),
        ("seed".into(), config.seed.to_string()),
    ];
    sensor_pairs("t1", &config.t1, &mut pairs);
    sensor_pairs("t2", &config.t2, &mut pairs);
    pairs.push(("beta_x".into(), render_f64_list(&config.beta_x)));
    pairs.push(("beta_y".into(), render_f64_list(&config.beta_y)));
    pairs.push(("beta_z".into(), render_f64_list(&config.beta_z)));
    pairs.push(("beta_nu".into(), render_f64_list(&config.beta_nu)));
    pairs.push(("position_noise_um".into(), render_f64_list(&config.position_noise_um)));
    pairs.push(("freq_noise_mhz".into(), config.freq_noise_mhz.to_string()));
    pairs.push(("position_interval_s".into(), config.position_interval_s.to_string()));
    pairs.push(("odmr_interval_s".into(), config.odmr_interval_s.to_string()));
    pairs.push(("mismatch_cubic".into(), config.mismatch_cubic.to_string()));
    match config.discontinuity {
        Some(d) => {
            pairs.push(("discontinuity.enabled".into(), "true".into()));
            pairs.push(("discontinuity.t_break_s".into(), d.t_break_s.to_string()));
            pairs.push(("discontinuity.y_offset_um".into(), d.y_offset_um.to_string()));
            pairs.push(("discontinuity.z_offset_um".into(), d.z_offset_um.to_string()));
        }
        None => pairs.push(("discontinuity.enabled".into(), "false".into())),
    }
    pairs.push(("rabi.center_ghz".into(), config.rabi.center_ghz.to_string()));
    pairs.push(("rabi.fwhm_mhz".into(), config.rabi.fwhm_mhz.to_string()));
    pairs.push(("rabi.peak_contrast".into(), config.rabi.peak_contrast.to_string()));
    pairs.push(("rabi.baseline".into(), config.rabi.baseline.to_string()));
    pairs.push(("rabi.scan_start_ghz".into(), config.rabi.scan_start_ghz.to_string()));
    pairs.push(("rabi.scan_end_ghz".into(), config.rabi.scan_end_ghz.to_string()));
    pairs.push(("rabi.points".into(), config.rabi.points.to_string()));
    pairs.push(("rabi.noise_fraction".into(), config.rabi.noise_fraction.to_string()));
    keyvalue::render(&pairs)
}

fn fixed_list<const N: usize>(raw: &str, key: &str) -> Result<[f64; N]> {
    let list = parse_f64_list(raw, key)?;
    list.as_slice().try_into().map_err(|_| Error::Parse {
        line: 0,
        message: format!("key '{key}': expected {N} comma-separated values, got {}", list.len()),
    })
}

fn sensor_field(s: &mut SensorParams, field: &str, raw: &str, key: &str) -> Result<()> {
    let v = parse_f64(raw, key)?;
    match field {
        "base_c" => s.base_c = v,
        "amplitude_c" => s.diurnal_amplitude_c = v,
        "period_s" => s.diurnal_period_s = v,
        "trend_c_per_day" => s.trend_c_per_day = v,
        "noise_sigma_c" => s.noise_sigma_c = v,
        "least_count_c" => s.least_count_c = v,
        "sample_interval_s" => s.sample_interval_s = v,
        _ => {
            return Err(Error::Parse {
                line: 0,
                message: format!("unknown config key '{key}'"),
            })
        }
    }
    Ok(())
}

/// Parses overrides and merges them onto the default scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let pairs = keyvalue::parse(text)?;
    let mut config = ScenarioConfig::default();
    let mut disc_enabled: Option<bool> = None;
    let mut disc = config.discontinuity.unwrap_or_default();
    let mut disc_touched = false;
    for (key, raw) in &pairs {
        match key.as_str() {
            "format" => {
                if raw != CONFIG_FORMAT {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!(
                            "unsupported config format '{raw}', expected '{CONFIG_FORMAT}'"
                        ),
                    });
                }
            }
            "duration_days" => config.duration_days = parse_f64(raw, key)?,
            "seed" => {
                config.seed = raw.parse().map_err(|_| Error::Parse {
                    line: 0,
                    message: format!("key 'seed': '{raw}' is not an unsigned integer"),
                })?
            }
            "beta_x" => config.beta_x = fixed_list(raw, key)?,
            "beta_y" => config.beta_y = fixed_list(raw, key)?,
            "beta_z" => config.beta_z = fixed_list(raw, key)?,
            "beta_nu" => config.beta_nu = fixed_list(raw, key)?,
            "position_noise_um" => config.position_noise_um = fixed_list(raw, key)?,
            "freq_noise_mhz" => config.freq_noise_mhz = parse_f64(raw, key)?,
            "position_interval_s" => config.position_interval_s = parse_f64(raw, key)?,
            "odmr_interval_s" => config.odmr_interval_s = parse_f64(raw, key)?,
            "mismatch_cubic" => config.mismatch_cubic = parse_f64(raw, key)?,
            "discontinuity.enabled" => {
                disc_enabled = Some(match raw.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(Error::Parse {
                            line: 0,
                            message: format!("key '{key}': '{raw}' is not 'true' or 'false'"),
                        })
                    }
                })
            }
            "discontinuity.t_break_s" => {
                disc.t_break_s = parse_f64(raw, key)?;
                disc_touched = true;
            }
            "discontinuity.y_offset_um" => {
                disc.y_offset_um = parse_f64(raw, key)?;
                disc_touched = true;
            }
            "discontinuity.z_offset_um" => {
                disc.z_offset_um = parse_f64(raw, key)?;
                disc_touched = true;
            }
            "rabi.center_ghz" => config.rabi.center_ghz = parse_f64(raw, key)?,
            "rabi.fwhm_mhz" => config.rabi.fwhm_mhz = parse_f64(raw, key)?,
            "rabi.peak_contrast" => config.rabi.peak_contrast = parse_f64(raw, key)?,
            "rabi.baseline" => config.rabi.baseline = parse_f64(raw, key)?,
            "rabi.scan_start_ghz" => config.rabi.scan_start_ghz = parse_f64(raw, key)?,
            "rabi.scan_end_ghz" => config.rabi.scan_end_ghz = parse_f64(raw, key)?,
            "rabi.points" => config.rabi.points = keyvalue::require_usize(&pairs, key)?,
            "rabi.noise_fraction" => config.rabi.noise_fraction = parse_f64(raw, key)?,
            _ => {
                if let Some(field) = key.strip_prefix("t1.") {
                    sensor_field(&mut config.t1, field, raw, key)?;
                } else if let Some(field) = key.strip_prefix("t2.") {
                    sensor_field(&mut config.t2, field, raw, key)?;
                } else {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("unknown config key '{key}'"),
                    });
                }
            }
        }
    }
    config.discontinuity = match disc_enabled {
        Some(false) => None,
        Some(true) => Some(disc),
        None if disc_touched => Some(disc),
        None => config.discontinuity,
    };
    config.validate()?;
    Ok(config)
}

pub fn save_config(path: &Path, config: &ScenarioConfig) -> Result<()> {
    super::write_atomic(path, &render_config(config))
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Machine-readable summary of what a scenario actually generated: the
/// generating coefficients and the local temperature sensitivity of each
/// target, for comparing fitted models against truth.
pub fn render_ground_truth(config: &ScenarioConfig) -> String {
    let mut pairs: Vec<(String, String)> = vec![
        ("format".into(), "drift-ground-truth/1".into()),
        ("seed".into(), config.seed.to_string()),
        ("duration_days".into(), config.duration_days.to_string()),
    ];
    for target in ["X", "Y", "Z", "nu_res"] {
        let beta = config.beta(target).expect("known target");
        pairs.push((format!("beta_{target}"), render_f64_list(&beta)));
        let rate = config.nominal_t2_rate(target).expect("known target");
        pairs.push((format!("t2_rate_{target}"), rate.to_string()));
    }
    keyvalue::render(&pairs)
}
