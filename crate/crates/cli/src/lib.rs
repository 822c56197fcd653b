//! Command-line front end: `analyze`, `synth` and `calibrate`.
//!
//! Exit codes: 0 success, 2 input error, 3 degenerate statistics,
//! 4 configuration error (including unusable flags and unwritable outputs).

mod analyze;
mod generate;
mod manifest;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use esm_hotspots::stats::DEFAULT_INCREMENTS;
use esm_hotspots::Error;

pub use analyze::{
    cmd_analyze, AnalyzeOutcome, MANIFEST_FILE, POINTS_FILE, REJECTIONS_FILE, SPOTS_CSV_FILE, SPOTS_FILE,
};
pub use generate::{cmd_calibrate, cmd_synth, load_scenario};
pub use manifest::{Manifest, MANIFEST_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "esm-hotspots", version, about = "Hot and cold spots of geotagged experience-sampling reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the optimized hot spot analysis on a report CSV.
    Analyze(AnalyzeArgs),
    /// Write a synthetic report CSV.
    Synth(SynthArgs),
    /// Run seeded Monte-Carlo replicates and write a calibration CSV.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    /// Fixed distance band in meters; skips the incremental band search.
    #[arg(long)]
    pub band: Option<f64>,
    /// Minimum confidence for spot membership: 90, 95 or 99.
    #[arg(long = "min-conf", default_value_t = 90)]
    pub min_conf: u32,
    /// Smallest number of reports that forms a spot.
    #[arg(long = "min-size", default_value_t = esm_hotspots::spots::DEFAULT_MIN_SIZE)]
    pub min_size: usize,
    /// Number of distances evaluated by the band search.
    #[arg(long, default_value_t = DEFAULT_INCREMENTS)]
    pub increments: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Report CSV to analyze.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving the output artifacts.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub stats: StatArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Destination CSV file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `standard`, `null`, or a path to a scenario JSON file.
    #[arg(long, default_value = "standard")]
    pub scenario: String,
    /// Overrides the scenario's number of background reports.
    #[arg(long = "n-background")]
    pub n_background: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Destination CSV file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    /// Replicate `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `null`, `standard`, or a path to a scenario JSON file.
    #[arg(long, default_value = "null")]
    pub scenario: String,
    /// Overrides the scenario's number of background reports.
    #[arg(long = "n-background")]
    pub n_background: Option<usize>,
    #[command(flatten)]
    pub stats: StatArgs,
}

/// A failed command: message for stderr plus process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DegenerateValues(_) | Error::NoNeighbors | Error::DegenerateMarginals => EXIT_DEGENERATE,
        Error::InvalidBand(_) | Error::InvalidRadius(_) | Error::InvalidConfig(_) | Error::InvalidPValue(_) => {
            EXIT_CONFIG
        }
        Error::EmptyDataset
        | Error::SchemaError(_)
        | Error::IdOutOfRange { .. }
        | Error::InsufficientPoints { .. }
        | Error::InvalidCoordinate(_)
        | Error::InputMismatch(_)
        | Error::InvalidReport(_)
        | Error::InvalidRatingTable(_)
        | Error::UnknownEvent(_)
        | Error::Io(_) => EXIT_INPUT,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let outcome = cmd_analyze(&args)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} reports, band {:.1} m, {} significant points, {} spots -> {}",
                outcome.manifest.n_reports,
                outcome.manifest.chosen_band,
                outcome.manifest.n_significant,
                outcome.manifest.spots.len(),
                args.out.display()
            );
            if outcome.manifest.input.n_rejected > 0 {
                eprintln!(
                    "warning: {} rows rejected, see {}",
                    outcome.manifest.input.n_rejected,
                    args.out.join(REJECTIONS_FILE).display()
                );
            }
            Ok(())
        }
        Command::Synth(args) => {
            let digest = cmd_synth(&args)?;
            println!("wrote {} (sha256 {digest})", args.out.display());
            Ok(())
        }
        Command::Calibrate(args) => {
            let calibration = cmd_calibrate(&args)?;
            let summary =
                serde_json::to_string_pretty(&calibration.summary).map_err(|e| CliError::config(e.to_string()))?;
            println!("{summary}");
            Ok(())
        }
    }
}
