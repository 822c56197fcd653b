use std::fs;

use esm_hotspots::esm::write_reports;
use esm_hotspots::synth::{generate, run_calibration, Calibration, CalibrationConfig, SyntheticScenario};
use sha2::{Digest, Sha256};

use crate::analyze::validate_stats;
use crate::{CalibrateArgs, CliError, SynthArgs};

/// Resolves `null`, `standard`, or a JSON scenario file, then applies the
/// seed and optional background-size override.
pub fn load_scenario(spec: &str, seed: u64, n_background: Option<usize>) -> Result<SyntheticScenario, CliError> {
    let mut scenario = match spec {
        "standard" => SyntheticScenario::standard(seed),
        "null" => SyntheticScenario::null(500, seed),
        path => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read scenario {path}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("invalid scenario {path}: {e}")))?
        }
    };
    scenario.seed = seed;
    if let Some(n) = n_background {
        scenario.n_background = n;
    }
    scenario.validate()?;
    Ok(scenario)
}

/// Writes a synthetic dataset and returns its SHA-256 digest.
pub fn cmd_synth(args: &SynthArgs) -> Result<String, CliError> {
    let scenario = load_scenario(&args.scenario, args.seed, args.n_background)?;
    let data = generate(&scenario)?;
    let mut buf = Vec::new();
    write_reports(&mut buf, &data.reports)?;
    fs::write(&args.out, &buf).map_err(|e| CliError::config(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(hex::encode(Sha256::digest(&buf)))
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<Calibration, CliError> {
    if args.replicates < 1 {
        return Err(CliError::config("--replicates must be >= 1"));
    }
    let (analysis, min_conf) = validate_stats(&args.stats)?;
    let scenario = load_scenario(&args.scenario, args.seed, args.n_background)?;
    let config = CalibrationConfig {
        n_replicates: args.replicates,
        seed: args.seed,
        analysis,
        min_conf,
        min_size: args.stats.min_size,
    };
    let calibration = run_calibration(&scenario, &config)?;
    let mut buf = Vec::new();
    calibration.write_csv(&mut buf)?;
    fs::write(&args.out, &buf).map_err(|e| CliError::config(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(calibration)
}
