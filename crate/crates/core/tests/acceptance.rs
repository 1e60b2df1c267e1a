//! End-to-end acceptance checks for the drift-tracking pipeline.
//!
//! Each test covers one shipping requirement and prints a single PASS line
//! with the measured numbers (visible with `--nocapture`); the test name in
//! the harness output is the pass/fail record.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nvtrack::correlation::{correlation_matrix, slope_correlation};
use nvtrack::curvefit::{
    fit_lorentzian, fit_sine, lorentzian_eval, lorentzian_partials, rabi_contrast, sine_eval,
    sine_partials, SineFit,
};
use nvtrack::driftanalysis::{
    evaluate_tracking, half_contrast_threshold, window_exit_threshold, TrackingWindow,
};
use nvtrack::io::csvio;
use nvtrack::regression::{fit_series, frame_on_target_grid, residual_series, QuadraticModel};
use nvtrack::simulator::{noiseless, simulate_rabi_scan, simulate_scenario, ScenarioConfig};
use nvtrack::{align, TimeSeries};

const DAY: f64 = 86400.0;
const TRAIN_UNTIL: f64 = 2.5 * DAY;

fn train_all(
    t1: &TimeSeries,
    t2: &TimeSeries,
    targets: [&TimeSeries; 4],
    train_until: Option<f64>,
) -> Vec<QuadraticModel> {
    targets
        .iter()
        .map(|target| fit_series(t1, t2, target, train_until).expect("fit"))
        .collect()
}

#[test]
fn acceptance_01_noiseless_oracle_roundtrip_within_1e6_relative_in_under_10s() {
    let started = Instant::now();
    let config = noiseless(&ScenarioConfig::default());
    assert_eq!(config.duration_days, 10.0);
    let data = simulate_scenario(&config).expect("simulate");
    let models = train_all(
        &data.t1,
        &data.t2,
        data.target_series(),
        Some(TRAIN_UNTIL),
    );
    let mut worst: f64 = 0.0;
    for model in &models {
        assert!(!model.rank_deficient, "{} flagged rank deficient", model.target);
        let truth = config.beta(&model.target).expect("known target");
        for (k, (got, want)) in model.coefficients.iter().zip(&truth).enumerate() {
            assert!(*want != 0.0, "{} beta{k} oracle is zero", model.target);
            let rel = (got - want).abs() / want.abs();
            worst = worst.max(rel);
            assert!(
                rel < 1e-6,
                "{} beta{k}: {got} vs {want} (relative {rel:.3e})",
                model.target
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "pipeline took {elapsed:?}");
    println!(
        "ACCEPTANCE 01 PASS: four targets recovered, worst relative error {worst:.3e}, {elapsed:?}"
    );
}

#[test]
fn acceptance_02_held_out_week_stays_in_window() {
    let config = ScenarioConfig::default();
    let data = simulate_scenario(&config).expect("simulate");
    let models = train_all(
        &data.t1,
        &data.t2,
        [&data.x, &data.y, &data.z, &data.nu_res],
        Some(TRAIN_UNTIL),
    );
    let grid: Vec<f64> = data
        .x
        .times()
        .iter()
        .copied()
        .filter(|&t| t >= TRAIN_UNTIL)
        .collect();
    let held_out = align(
        &[&data.t1, &data.t2, &data.x, &data.y, &data.z],
        Some(&grid),
    )
    .expect("align");
    assert!(
        held_out.times().last().unwrap() - held_out.times()[0] >= 7.0 * DAY,
        "held-out span shorter than a week"
    );
    let window = TrackingWindow::default();
    let report = evaluate_tracking(&models[..3], &held_out, &window, None).expect("evaluate");

    let frac = |axis: &str| {
        report
            .in_window_fraction
            .iter()
            .find(|(t, _)| t == axis)
            .map(|(_, f)| *f)
            .expect("fraction present")
    };
    let stats = |axis: &str| {
        report
            .residual_stats
            .iter()
            .find(|(t, _)| t == axis)
            .map(|(_, s)| *s)
            .expect("stats present")
    };
    assert!(frac("X") >= 0.95, "X in-window fraction {}", frac("X"));
    assert!(frac("Y") >= 0.95, "Y in-window fraction {}", frac("Y"));
    let z = stats("Z");
    assert!(
        z.max < window.size_z_um / 2.0,
        "Z residual max {} exceeds half window",
        z.max
    );
    assert!(
        z.rms > stats("X").rms && z.rms > stats("Y").rms,
        "Z residuals should be the largest"
    );
    println!(
        "ACCEPTANCE 02 PASS: in-window X {:.4} Y {:.4}, Z residual max {:.4} um over {:.1} held-out days",
        frac("X"),
        frac("Y"),
        z.max,
        (held_out.times().last().unwrap() - held_out.times()[0]) / DAY
    );
}

#[test]
fn acceptance_03_window_exit_threshold_arithmetic() {
    let cases = [
        ("X", 1.533, 1.0, 0.326, 0.33),
        ("Y", 0.178, 0.7, 1.966, 1.98),
        ("Z", 0.682, 3.0, 2.199, 2.21),
    ];
    let mut summary = String::new();
    for (axis, rate, window, expected, printed) in cases {
        let got = window_exit_threshold(rate, window).expect("threshold");
        assert!(
            (got - expected).abs() < 5e-4,
            "{axis}: computed {got}, expected {expected}"
        );
        // The reference report prints values rounded from unpublished
        // intermediates; the recomputed numbers land within 0.02 degC of
        // them (0.0038 / 0.0137 / 0.0106), not all within 0.01.
        let gap = (got - printed).abs();
        assert!(gap < 0.02, "{axis}: gap to printed value {printed} is {gap}");
        summary.push_str(&format!("{axis} {got:.4} (gap {gap:.4}) "));
    }
    println!("ACCEPTANCE 03 PASS: {summary}");
}

#[test]
fn acceptance_04_half_contrast_threshold() {
    let got = half_contrast_threshold(1.55, 517.0).expect("threshold");
    assert!(
        (got - 1.499).abs() <= 1e-3,
        "half-contrast threshold {got}, expected 1.499 +- 0.001"
    );
    println!("ACCEPTANCE 04 PASS: half-contrast threshold {got:.5} degC");
}

#[test]
fn acceptance_05_lorentzian_width_recovery() {
    let config = ScenarioConfig::default();
    let (f, c) = simulate_rabi_scan(&config).expect("scan");
    let clean = fit_lorentzian(&f, &c).expect("fit");
    let rel_center = (clean.center_ghz - 1.458).abs() / 1.458;
    let rel_fwhm = (clean.fwhm_mhz - 1.55).abs() / 1.55;
    assert!(rel_center < 1e-6, "center relative error {rel_center:.3e}");
    assert!(rel_fwhm < 1e-6, "fwhm relative error {rel_fwhm:.3e}");

    let mut noisy_config = config;
    noisy_config.rabi.noise_fraction = 0.01;
    let (f, c) = simulate_rabi_scan(&noisy_config).expect("scan");
    let noisy = fit_lorentzian(&f, &c).expect("fit");
    let rel_noisy = (noisy.fwhm_mhz - 1.55).abs() / 1.55;
    assert!(rel_noisy < 0.05, "noisy fwhm {} ({rel_noisy:.3})", noisy.fwhm_mhz);
    println!(
        "ACCEPTANCE 05 PASS: clean fwhm {:.6} MHz (rel {rel_fwhm:.2e}), 1% noise fwhm {:.4} MHz (rel {rel_noisy:.4})",
        clean.fwhm_mhz, noisy.fwhm_mhz
    );
}

fn check_gradient(
    params: &[f64; 4],
    xs: &[f64],
    eval: impl Fn(&[f64; 4], f64) -> f64,
    partials: impl Fn(&[f64; 4], f64) -> [f64; 4],
    label: &str,
) {
    let anchor = params.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    for &x in xs {
        let analytic = partials(params, x);
        let mut fd = [0.0; 4];
        for k in 0..4 {
            // Step sized against the parameter vector, not the single entry,
            // so a parameter sitting at zero still gets a step that clears
            // the rounding noise of the central difference.
            let h = 1e-6 * params[k].abs().max(0.01 * anchor).max(1e-9);
            let mut plus = *params;
            let mut minus = *params;
            plus[k] += h;
            minus[k] -= h;
            fd[k] = (eval(&plus, x) - eval(&minus, x)) / (2.0 * h);
        }
        // Errors are judged against the largest entry of the Jacobian row:
        // a component that is analytically zero (width partial exactly at
        // the peak) only has to be zero at the row's noise level.
        let row_scale = analytic
            .iter()
            .chain(fd.iter())
            .fold(1e-12f64, |a, &v| a.max(v.abs()));
        for k in 0..4 {
            assert!(
                (analytic[k] - fd[k]).abs() / row_scale < 1e-5,
                "{label} d/dp{k} at x={x}: analytic {} vs fd {}",
                analytic[k],
                fd[k]
            );
        }
    }
}

#[test]
fn acceptance_06_contrast_value_and_gradient_checks() {
    // Contrast definition on exact parameters.
    let exact = SineFit {
        amplitude: 0.25,
        frequency: 5.0,
        phase: 0.0,
        offset: 1.0,
        rms_residual: 0.0,
    };
    assert_eq!(rabi_contrast(&exact).expect("contrast"), 50.0);

    // Fitted sine at its optimum.
    let t: Vec<f64> = (0..160).map(|k| k as f64 * 0.005).collect();
    let y: Vec<f64> = t
        .iter()
        .map(|&ti| sine_eval(&[0.25, 5.0, 0.3, 1.0], ti))
        .collect();
    let sine = fit_sine(&t, &y).expect("sine fit");
    let contrast = rabi_contrast(&sine).expect("contrast");
    assert!((contrast - 50.0).abs() < 1e-5, "fitted contrast {contrast}");
    let sine_params = sine.params();
    check_gradient(&sine_params, &t[..20], sine_eval, sine_partials, "sine");

    // Fitted Lorentzian at its optimum.
    let (f, c) = simulate_rabi_scan(&ScenarioConfig::default()).expect("scan");
    let lor = fit_lorentzian(&f, &c).expect("lorentzian fit");
    let lor_params = lor.params();
    check_gradient(&lor_params, &f, lorentzian_eval, lorentzian_partials, "lorentzian");
    println!("ACCEPTANCE 06 PASS: contrast 50% exact, gradient checks within 1e-5");
}

#[test]
fn acceptance_07_correlation_invariants_and_sign_pattern() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let n = rng.random_range(5..40);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        assert_eq!(slope_correlation(&u, &u).expect("self"), 1.0, "case {case}");
        // Negation renormalizes to 1 - x with one extra rounding per sample,
        // so the mirrored score sits within an ulp of -1, not exactly on it.
        let mirror = slope_correlation(&u, &neg).expect("mirror");
        assert!(
            (-1.0..=-1.0 + 1e-12).contains(&mirror),
            "case {case}: mirror {mirror}"
        );
        let r = slope_correlation(&u, &w).expect("pair");
        assert!((-1.0..=1.0).contains(&r), "case {case}: {r} out of range");
    }

    let data = simulate_scenario(&ScenarioConfig::default()).expect("simulate");
    let frame = align(
        &[&data.t2, &data.x, &data.y, &data.z, &data.nu_res],
        None,
    )
    .expect("align");
    let matrix = correlation_matrix(&frame).expect("matrix");
    let entry = |a: &str, b: &str| matrix.get_by_name(a, b).expect("entry");
    for (other, negative) in [("X", true), ("Y", false), ("Z", true), ("nu_res", true)] {
        let r = entry("T2", other);
        if negative {
            assert!(r < -0.9, "T2 vs {other}: {r} not strongly negative");
        } else {
            assert!(r > 0.9, "T2 vs {other}: {r} not strongly positive");
        }
    }
    println!(
        "ACCEPTANCE 07 PASS: 1000 invariant cases; T2 row X {:.3} Y {:.3} Z {:.3} nu_res {:.3}",
        entry("T2", "X"),
        entry("T2", "Y"),
        entry("T2", "Z"),
        entry("T2", "nu_res")
    );
}

#[test]
#[allow(clippy::excessive_precision)]
fn acceptance_08_determinism_and_csv_roundtrip() {
    let config = ScenarioConfig::default();
    let first = simulate_scenario(&config).expect("simulate");
    let second = simulate_scenario(&config).expect("simulate");
    for (a, b) in first.series().iter().zip(second.series().iter()) {
        let ra = csvio::render_narrow_csv(a);
        let rb = csvio::render_narrow_csv(b);
        assert_eq!(ra, rb, "rendered {} differs between runs", a.name());
    }

    // Ingest -> emit -> ingest preserves every value bit for bit.
    for series in first.series() {
        let text = csvio::render_narrow_csv(series);
        let back = csvio::read_series_str(&text, series.name()).expect("parse");
        assert_eq!(back[0], *series, "{} round trip", series.name());
        assert_eq!(csvio::render_narrow_csv(&back[0]), text);
    }

    // ISO timestamps convert to epoch seconds without disturbing values.
    let iso = "timestamp,value\n2024-03-01T00:00:00Z,17.66\n2024-03-01T00:00:20Z,17.039999999999999\n";
    let parsed = csvio::read_series_str(iso, "T2").expect("parse iso");
    assert_eq!(parsed[0].values(), &[17.66, 17.039999999999999]);
    assert_eq!(parsed[0].times()[1] - parsed[0].times()[0], 20.0);
    println!("ACCEPTANCE 08 PASS: byte-identical reruns, exact CSV round trip");
}

#[test]
fn acceptance_09_constant_t1_sets_rank_flag_and_still_fits() {
    let mut config = noiseless(&ScenarioConfig::default());
    config.t1.diurnal_amplitude_c = 0.0;
    config.t1.trend_c_per_day = 0.0;
    config.duration_days = 6.0;
    let data = simulate_scenario(&config).expect("simulate");
    let spread = data
        .t1
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    assert_eq!(spread.0, spread.1, "T1 column must be constant");

    let model = fit_series(&data.t1, &data.t2, &data.x, None).expect("fit");
    assert!(model.rank_deficient, "constant T1 must set the rank flag");
    let frame = frame_on_target_grid(&data.t1, &data.t2, &data.x).expect("frame");
    let res = residual_series(&model, &frame).expect("residuals");
    assert!(
        res.stats.max < 1e-9,
        "training residual max {} exceeds 1e-9",
        res.stats.max
    );
    println!(
        "ACCEPTANCE 09 PASS: rank flag set, training residual max {:.3e}",
        res.stats.max
    );
}
