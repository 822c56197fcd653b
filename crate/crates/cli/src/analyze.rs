use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use esm_hotspots::analysis::{analyze_points, prepare, AnalysisConfig};
use esm_hotspots::diagnostics::Warning;
use esm_hotspots::esm::{parse_reports, write_rejections, ParsedReports};
use esm_hotspots::spots::{geojson, group_spots, membership, spot_report};
use esm_hotspots::stats::{Confidence, IncrementalConfig};
use sha2::{Digest, Sha256};

use crate::manifest::{bin_map, BandSearch, FdrSummary, InputInfo, Manifest, RunConfig, SpotSummary, MANIFEST_VERSION};
use crate::{AnalyzeArgs, CliError, StatArgs};

pub const POINTS_FILE: &str = "points.geojson";
pub const SPOTS_FILE: &str = "spots.geojson";
pub const SPOTS_CSV_FILE: &str = "spots.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REJECTIONS_FILE: &str = "rejections.csv";

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub manifest: Manifest,
    pub warnings: Vec<Warning>,
}

pub(crate) fn validate_stats(stats: &StatArgs) -> Result<(AnalysisConfig, Confidence), CliError> {
    if let Some(b) = stats.band {
        if !(b.is_finite() && b > 0.0) {
            return Err(CliError::config(format!("--band must be a positive number of meters, got {b}")));
        }
    }
    if stats.min_size < 1 {
        return Err(CliError::config("--min-size must be >= 1"));
    }
    if stats.increments < 1 {
        return Err(CliError::config("--increments must be >= 1"));
    }
    let conf = Confidence::from_percent(stats.min_conf).map_err(CliError::from)?;
    let config = AnalysisConfig {
        band: stats.band,
        incremental: IncrementalConfig { increments: stats.increments, ..IncrementalConfig::default() },
    };
    Ok((config, conf))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::config(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn rejection_bytes(parsed: &ParsedReports) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_rejections(&mut buf, &parsed.rejections)?;
    Ok(buf)
}

/// Runs the full analysis. Artifacts are only written once every step has
/// succeeded; an input where every row was rejected produces just the
/// rejection report.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<AnalyzeOutcome, CliError> {
    let (config, min_conf) = validate_stats(&args.stats)?;
    let raw =
        fs::read(&args.input).map_err(|e| CliError::input(format!("cannot read {}: {e}", args.input.display())))?;
    let sha256 = hex::encode(Sha256::digest(&raw));
    let parsed = parse_reports(raw.as_slice())?;

    if parsed.reports.is_empty() {
        fs::create_dir_all(&args.out)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", args.out.display())))?;
        let path = args.out.join(REJECTIONS_FILE);
        write_file(&path, &rejection_bytes(&parsed)?)?;
        return Err(CliError::input(format!(
            "no valid reports: all {} rows rejected, see {}",
            parsed.rejections.len(),
            path.display()
        )));
    }

    let reports = &parsed.reports;
    let prepared = prepare(reports)?;
    let analysis = analyze_points(&prepared.planar, &prepared.values, &config)?;
    let spots =
        group_spots(&analysis.results, &analysis.graph, reports, &prepared.planar, min_conf, args.stats.min_size)?;

    let points_fc = geojson::points_collection(reports, &analysis.results, &membership(&spots, reports.len()))?;
    let spots_fc = geojson::spots_collection(&spots, &prepared.projection);
    let mut spots_csv = Vec::new();
    spot_report(&spots).write_csv(&mut spots_csv)?;

    let mut artifacts = vec![POINTS_FILE.to_string(), SPOTS_FILE.to_string(), SPOTS_CSV_FILE.to_string()];
    if !parsed.rejections.is_empty() {
        artifacts.push(REJECTIONS_FILE.to_string());
    }
    let participants: BTreeSet<&str> = reports.iter().map(|r| r.participant_id.as_str()).collect();
    let manifest = Manifest {
        manifest_version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input: InputInfo {
            path: args.input.display().to_string(),
            sha256,
            n_accepted: reports.len(),
            n_rejected: parsed.rejections.len(),
        },
        config: RunConfig::new(args.stats.band, min_conf.percent(), args.stats.min_size, args.stats.increments),
        projection: prepared.projection,
        n_reports: reports.len(),
        n_participants: participants.len(),
        chosen_band: analysis.band,
        band_search: analysis.band_selection.as_ref().map(|s| BandSearch {
            rule: s.rule,
            start_distance: s.start_distance,
            step: s.step,
            n_locational_outliers: s.outliers.len(),
            curve: s.curve.clone(),
        }),
        bin_counts: bin_map(analysis.bin_counts()),
        n_significant: analysis.n_significant(),
        fdr: analysis
            .fdr
            .levels
            .iter()
            .map(|l| FdrSummary { alpha: l.alpha, critical_p: l.critical_p, n_significant: l.significant.len() })
            .collect(),
        spots: spots.iter().map(SpotSummary::from).collect(),
        warnings: analysis.warnings.clone(),
        artifacts,
    };

    let manifest_bytes = json_bytes(&manifest)?;
    let points_bytes = json_bytes(&points_fc)?;
    let spots_bytes = json_bytes(&spots_fc)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", args.out.display())))?;
    write_file(&args.out.join(POINTS_FILE), &points_bytes)?;
    write_file(&args.out.join(SPOTS_FILE), &spots_bytes)?;
    write_file(&args.out.join(SPOTS_CSV_FILE), &spots_csv)?;
    if !parsed.rejections.is_empty() {
        write_file(&args.out.join(REJECTIONS_FILE), &rejection_bytes(&parsed)?)?;
    }
    write_file(&args.out.join(MANIFEST_FILE), &manifest_bytes)?;
    Ok(AnalyzeOutcome { warnings: analysis.warnings, manifest })
}
