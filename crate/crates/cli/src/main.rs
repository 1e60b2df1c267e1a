//! `nvtrack`: reproducible pipeline runs over drift-tracking data.
//!
//! Exit codes: 0 success, 2 usage error, 3 malformed input, 4 pipeline
//! failure on well-formed input. Every failure prints exactly one
//! `error[<class>]: <message>` line on stderr.

mod commands;
mod dataio;
mod heatmap;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "nvtrack",
    version,
    about = "Temperature-correlated drift tracking: simulate, correlate, train, predict, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known ground truth
    Simulate(SimulateArgs),
    /// Normalize arbitrary accepted CSVs into per-variable files
    Ingest(IngestArgs),
    /// Compute the correlation matrix of the input variables
    Correlate(CorrelateArgs),
    /// Fit per-target temperature-to-drift models
    Train(TrainArgs),
    /// Predict target values from temperatures and saved models
    Predict(PredictArgs),
    /// Score saved models against actual observations
    Evaluate(EvaluateArgs),
    /// Fit a resonance scan (Lorentzian) or oscillation trace (sine)
    RabiFit(RabiFitArgs),
    /// Render a stored evaluation report in both output forms
    Report(ReportArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Scenario overrides, `key = value` lines merged onto the defaults
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Random seed (overrides the config file)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct IngestArgs {
    /// Input CSV files or directories (repeatable)
    #[arg(long = "in", value_name = "PATH", required = true)]
    pub input: Vec<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CorrelateArgs {
    /// Input CSV files or directories (repeatable)
    #[arg(long = "in", value_name = "PATH", required = true)]
    pub input: Vec<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Comma-separated variable subset, in matrix order
    #[arg(long, value_name = "LIST")]
    pub vars: Option<String>,
    /// Also render correlation.png (best effort)
    #[arg(long)]
    pub image: bool,
    /// Do not bridge sampling gaps longer than this many seconds
    #[arg(long, value_name = "SECONDS")]
    pub gap_split_seconds: Option<f64>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Input CSV files or directories (repeatable)
    #[arg(long = "in", value_name = "PATH", required = true)]
    pub input: Vec<PathBuf>,
    /// Output directory for the .model files
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Train on the first N days of the aligned data
    #[arg(long, value_name = "DAYS", default_value_t = 2.5)]
    pub split_days: f64,
    /// Train on rows up to this absolute timestamp (overrides --split-days)
    #[arg(long, value_name = "SECONDS")]
    pub train_until: Option<f64>,
    /// Comma-separated target subset (default: every canonical target found)
    #[arg(long, value_name = "LIST")]
    pub targets: Option<String>,
    /// Do not bridge sampling gaps longer than this many seconds
    #[arg(long, value_name = "SECONDS")]
    pub gap_split_seconds: Option<f64>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Input CSVs holding at least T1 and T2
    #[arg(long = "in", value_name = "PATH", required = true)]
    pub input: Vec<PathBuf>,
    /// Model file (repeatable)
    #[arg(long, value_name = "FILE", required = true)]
    pub model: Vec<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Do not bridge sampling gaps longer than this many seconds
    #[arg(long, value_name = "SECONDS")]
    pub gap_split_seconds: Option<f64>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Input CSV files or directories (repeatable)
    #[arg(long = "in", value_name = "PATH", required = true)]
    pub input: Vec<PathBuf>,
    /// Directory holding .model files (default: first --in path)
    #[arg(long, value_name = "DIR")]
    pub models: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Evaluate rows after the first N days (0 evaluates everything)
    #[arg(long, value_name = "DAYS", default_value_t = 2.5)]
    pub split_days: f64,
    /// Evaluate rows from this absolute timestamp (overrides --split-days)
    #[arg(long, value_name = "SECONDS")]
    pub train_until: Option<f64>,
    /// Tracking window sizes as X,Y,Z in micrometers
    #[arg(long, value_name = "X,Y,Z")]
    pub window: Option<String>,
    /// Resonance linewidth, enables the half-contrast threshold
    #[arg(long, value_name = "MHZ")]
    pub fwhm_mhz: Option<f64>,
    /// Do not bridge sampling gaps longer than this many seconds
    #[arg(long, value_name = "SECONDS")]
    pub gap_split_seconds: Option<f64>,
}

#[derive(Args)]
pub struct RabiFitArgs {
    /// Scan CSV: `frequency_ghz,contrast_percent` or `time_s,signal`
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    /// report.csv from `evaluate`, or a directory containing it
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Ingest(args) => commands::ingest(args),
        Command::Correlate(args) => commands::correlate(args),
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::RabiFit(args) => commands::rabi_fit(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (class, code) = if err.is_input() { ("input", 3) } else { ("pipeline", 4) };
            eprintln!("error[{class}]: {}: {err}", err.code());
            ExitCode::from(code)
        }
    }
}
