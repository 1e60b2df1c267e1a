//! Implementations of the pipeline subcommands.
//!
//! Every command writes its outputs atomically and finishes by writing a
//! `manifest_<command>.txt` recording parameters, input hashes and output
//! names, so identical invocations leave byte-identical directories.

use std::path::{Path, PathBuf};

use nvtrack::correlation::correlation_matrix;
use nvtrack::curvefit::{fit_lorentzian, fit_sine, rabi_contrast};
use nvtrack::driftanalysis::{evaluate_tracking, TrackingWindow};
use nvtrack::error::{Error, Result};
use nvtrack::io::{config as configio, csvio, keyvalue, model as modelio};
use nvtrack::io::{write_atomic, write_atomic_bytes};
use nvtrack::regression::{fit_quadratic, QuadraticModel};
use nvtrack::simulator::{simulate_scenario, ScenarioConfig};
use nvtrack::{align, TimeSeries};

use crate::dataio::{self, ScanKind};
use crate::heatmap;
use crate::manifest::Manifest;
use crate::{
    CorrelateArgs, EvaluateArgs, IngestArgs, PredictArgs, RabiFitArgs, ReportArgs, SimulateArgs,
    TrainArgs,
};

const SECONDS_PER_DAY: f64 = 86400.0;
const CANONICAL_TARGETS: [&str; 4] = ["X", "Y", "Z", "nu_res"];

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => configio::load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let data = simulate_scenario(&config)?;
    ensure_dir(&args.out)?;

    let mut manifest = Manifest::new("simulate");
    if let Some(path) = &args.config {
        manifest.input(path)?;
    }
    manifest.param("seed", config.seed);
    manifest.param("duration_days", config.duration_days);

    for series in data.series() {
        let name = format!("{}.csv", series.name());
        write_atomic(&args.out.join(&name), &csvio::render_narrow_csv(series))?;
        manifest.output(&name);
    }
    write_atomic(
        &args.out.join("rabi_scan.csv"),
        &dataio::render_scan_csv(&data.rabi_freq_ghz, &data.rabi_contrast),
    )?;
    manifest.output("rabi_scan.csv");
    write_atomic(
        &args.out.join("ground_truth.txt"),
        &configio::render_ground_truth(&config),
    )?;
    manifest.output("ground_truth.txt");
    write_atomic(&args.out.join("scenario.txt"), &configio::render_config(&config))?;
    manifest.output("scenario.txt");
    manifest.write(&args.out)?;
    println!(
        "simulated {} days (seed {}) into {}",
        config.duration_days,
        config.seed,
        args.out.display()
    );
    Ok(())
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let paths = dataio::collect_csv_paths(&args.input)?;
    let series = dataio::load_series(&args.input)?;
    ensure_dir(&args.out)?;
    let mut manifest = Manifest::new("ingest");
    manifest.inputs(&paths)?;
    for s in &series {
        let name = format!("{}.csv", s.name());
        write_atomic(&args.out.join(&name), &csvio::render_narrow_csv(s))?;
        manifest.output(&name);
    }
    manifest.write(&args.out)?;
    println!("ingested {} series from {} files", series.len(), paths.len());
    Ok(())
}

pub fn correlate(args: &CorrelateArgs) -> Result<()> {
    let paths = dataio::collect_csv_paths(&args.input)?;
    let series = dataio::load_series(&args.input)?;
    let selected: Vec<&TimeSeries> = match &args.vars {
        Some(list) => list
            .split(',')
            .map(|name| dataio::find(&series, name.trim()))
            .collect::<Result<_>>()?,
        None => series.iter().collect(),
    };
    if selected.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: selected.len() });
    }
    let grid = dataio::union_grid(&selected, args.gap_split_seconds)?;
    let frame = align(&selected, Some(&grid))?;
    let matrix = correlation_matrix(&frame)?;

    ensure_dir(&args.out)?;
    write_atomic(&args.out.join("correlation.csv"), &csvio::render_matrix_csv(&matrix))?;
    let mut manifest = Manifest::new("correlate");
    manifest.inputs(&paths)?;
    manifest.param_opt("vars", args.vars.as_ref());
    manifest.param_opt("gap_split_seconds", args.gap_split_seconds);
    manifest.param("image", args.image);
    manifest.output("correlation.csv");
    if args.image {
        // The numeric CSV is the contract; the image is best effort.
        match heatmap::render_png(&matrix) {
            Ok(bytes) => {
                write_atomic_bytes(&args.out.join("correlation.png"), &bytes)?;
                manifest.output("correlation.png");
            }
            Err(e) => eprintln!("warning: heatmap rendering failed: {e}"),
        }
    }
    manifest.write(&args.out)?;
    println!(
        "correlated {} variables over {} aligned rows",
        matrix.variables().len(),
        frame.len()
    );
    Ok(())
}

/// Training cutoff: an absolute timestamp wins over a day count measured
/// from the start of the aligned data.
fn cutoff(times: &[f64], split_days: f64, train_until: Option<f64>) -> f64 {
    train_until.unwrap_or_else(|| times[0] + split_days * SECONDS_PER_DAY)
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let paths = dataio::collect_csv_paths(&args.input)?;
    let series = dataio::load_series(&args.input)?;
    let t1 = dataio::find(&series, "T1")?;
    let t2 = dataio::find(&series, "T2")?;
    let targets: Vec<&TimeSeries> = match &args.targets {
        Some(list) => list
            .split(',')
            .map(|name| dataio::find(&series, name.trim()))
            .collect::<Result<_>>()?,
        None => CANONICAL_TARGETS
            .iter()
            .filter_map(|name| series.iter().find(|s| s.name() == *name))
            .collect(),
    };
    if targets.is_empty() {
        return Err(Error::MissingColumn { name: CANONICAL_TARGETS.join("|") });
    }

    ensure_dir(&args.out)?;
    let mut manifest = Manifest::new("train");
    manifest.inputs(&paths)?;
    manifest.param("split_days", args.split_days);
    manifest.param_opt("train_until", args.train_until);
    manifest.param_opt("targets", args.targets.as_ref());
    manifest.param_opt("gap_split_seconds", args.gap_split_seconds);

    for target in targets {
        let grid = dataio::target_grid(&[target], &[t1, t2], args.gap_split_seconds)?;
        let frame = align(&[t1, t2, target], Some(&grid))?;
        let cut = cutoff(frame.times(), args.split_days, args.train_until);
        let train_frame = frame.restrict_rows(f64::NEG_INFINITY, cut)?;
        let model = fit_quadratic(&train_frame, target.name())?;
        let file = format!("{}.model", target.name());
        modelio::save_model(&args.out.join(&file), &model)?;
        manifest.output(&file);
        println!(
            "trained {}: {} rows, rms {:.6}, rank_deficient {}",
            model.target, model.n_train, model.rms_train, model.rank_deficient
        );
    }
    manifest.write(&args.out)
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let paths = dataio::collect_csv_paths(&args.input)?;
    let series = dataio::load_series(&args.input)?;
    let t1 = dataio::find(&series, "T1")?;
    let t2 = dataio::find(&series, "T2")?;
    let grid = dataio::union_grid(&[t1, t2], args.gap_split_seconds)?;
    let frame = align(&[t1, t2], Some(&grid))?;
    let v1 = frame.require_column("T1")?;
    let v2 = frame.require_column("T2")?;

    ensure_dir(&args.out)?;
    let mut manifest = Manifest::new("predict");
    manifest.inputs(&paths)?;
    manifest.inputs(&args.model)?;
    manifest.param_opt("gap_split_seconds", args.gap_split_seconds);
    for model_path in &args.model {
        let model = modelio::load_model(model_path)?;
        let values: Vec<f64> = v1
            .iter()
            .zip(v2)
            .map(|(&a, &b)| model.predict(a, b))
            .collect();
        let predicted =
            TimeSeries::new(format!("predicted_{}", model.target), grid.clone(), values)?;
        let name = format!("predicted_{}.csv", model.target);
        write_atomic(&args.out.join(&name), &csvio::render_narrow_csv(&predicted))?;
        manifest.output(&name);
        println!("predicted {} at {} instants", model.target, predicted.len());
    }
    manifest.write(&args.out)
}

fn canonical_rank(target: &str) -> usize {
    CANONICAL_TARGETS
        .iter()
        .position(|t| *t == target)
        .unwrap_or(CANONICAL_TARGETS.len())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let paths = dataio::collect_csv_paths(&args.input)?;
    let series = dataio::load_series(&args.input)?;
    let t1 = dataio::find(&series, "T1")?;
    let t2 = dataio::find(&series, "T2")?;

    let model_dir = args.models.clone().unwrap_or_else(|| args.input[0].clone());
    let mut model_paths: Vec<PathBuf> = std::fs::read_dir(&model_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "model"))
        .collect();
    model_paths.sort();
    if model_paths.is_empty() {
        return Err(Error::MissingColumn { name: format!("{}/*.model", model_dir.display()) });
    }
    let mut models: Vec<QuadraticModel> = model_paths
        .iter()
        .map(|p| modelio::load_model(p))
        .collect::<Result<_>>()?;
    models.sort_by_key(|m| canonical_rank(&m.target));

    let targets: Vec<&TimeSeries> = models
        .iter()
        .map(|m| dataio::find(&series, &m.target))
        .collect::<Result<_>>()?;
    let grid = dataio::target_grid(&targets, &[t1, t2], args.gap_split_seconds)?;
    let mut sources: Vec<&TimeSeries> = vec![t1, t2];
    sources.extend(targets);
    let frame = align(&sources, Some(&grid))?;
    let cut = cutoff(frame.times(), args.split_days, args.train_until);
    let eval_frame = frame.restrict_rows(cut, f64::INFINITY)?;

    let window = parse_window(args.window.as_deref())?;
    let report = evaluate_tracking(&models, &eval_frame, &window, args.fwhm_mhz)?;

    ensure_dir(&args.out)?;
    write_atomic(&args.out.join("report.csv"), &csvio::render_report_csv(&report))?;
    let mut manifest = Manifest::new("evaluate");
    manifest.inputs(&paths)?;
    manifest.inputs(&model_paths)?;
    manifest.param("split_days", args.split_days);
    manifest.param_opt("train_until", args.train_until);
    manifest.param_opt("window", args.window.as_ref());
    manifest.param_opt("fwhm_mhz", args.fwhm_mhz);
    manifest.param_opt("gap_split_seconds", args.gap_split_seconds);
    manifest.output("report.csv");
    manifest.write(&args.out)?;
    print!("{report}");
    Ok(())
}

fn parse_window(spec: Option<&str>) -> Result<TrackingWindow> {
    match spec {
        None => Ok(TrackingWindow::default()),
        Some(raw) => {
            let sizes = keyvalue::parse_f64_list(raw, "window")?;
            if sizes.len() != 3 {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("--window needs three sizes, got {}", sizes.len()),
                });
            }
            TrackingWindow::new(sizes[0], sizes[1], sizes[2])
        }
    }
}

pub fn rabi_fit(args: &RabiFitArgs) -> Result<()> {
    let (kind, xs, ys) = dataio::read_scan(&args.input)?;
    let pairs: Vec<(String, String)> = match kind {
        ScanKind::Lorentzian => {
            let fit = fit_lorentzian(&xs, &ys)?;
            vec![
                ("kind".into(), "lorentzian".into()),
                ("center_ghz".into(), fit.center_ghz.to_string()),
                ("fwhm_mhz".into(), fit.fwhm_mhz.to_string()),
                ("peak_contrast".into(), fit.peak_height.to_string()),
                ("baseline".into(), fit.baseline.to_string()),
                ("rms_residual".into(), fit.rms_residual.to_string()),
            ]
        }
        ScanKind::Sine => {
            let fit = fit_sine(&xs, &ys)?;
            let contrast = rabi_contrast(&fit)?;
            vec![
                ("kind".into(), "sine".into()),
                ("amplitude".into(), fit.amplitude.to_string()),
                ("frequency_hz".into(), fit.frequency.to_string()),
                ("phase_rad".into(), fit.phase.to_string()),
                ("offset".into(), fit.offset.to_string()),
                ("rms_residual".into(), fit.rms_residual.to_string()),
                ("contrast_percent".into(), contrast.to_string()),
            ]
        }
    };
    let text = keyvalue::render(&pairs);
    ensure_dir(&args.out)?;
    write_atomic(&args.out.join("rabi_fit.txt"), &text)?;
    let mut manifest = Manifest::new("rabi-fit");
    manifest.input(&args.input)?;
    manifest.output("rabi_fit.txt");
    manifest.write(&args.out)?;
    print!("{text}");
    Ok(())
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let path = if args.input.is_dir() {
        args.input.join("report.csv")
    } else {
        args.input.clone()
    };
    let report = csvio::parse_report_csv(&std::fs::read_to_string(&path)?)?;
    ensure_dir(&args.out)?;
    write_atomic(&args.out.join("report.txt"), &report.to_string())?;
    write_atomic(&args.out.join("report.csv"), &csvio::render_report_csv(&report))?;
    let mut manifest = Manifest::new("report");
    manifest.input(&path)?;
    manifest.output("report.txt");
    manifest.output("report.csv");
    manifest.write(&args.out)?;
    print!("{report}");
    Ok(())
}
