//! The run manifest written next to the analysis artifacts.
//!
//! It holds no wall-clock fields, so identical input and configuration give
//! a byte-identical file, and it records every setting needed to re-run.

use std::collections::BTreeMap;

use esm_hotspots::diagnostics::Warning;
use esm_hotspots::geo::Projection;
use esm_hotspots::spots::{Polarity, Spot};
use esm_hotspots::stats::{MoranResult, PeakRule, ALPHA_LEVELS};
use serde::Serialize;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub input: InputInfo,
    pub config: RunConfig,
    pub projection: Projection,
    pub n_reports: usize,
    pub n_participants: usize,
    pub chosen_band: f64,
    /// `None` when the band was fixed on the command line.
    pub band_search: Option<BandSearch>,
    /// Point counts per bin, keys `-3` … `3`.
    pub bin_counts: BTreeMap<String, usize>,
    pub n_significant: usize,
    pub fdr: Vec<FdrSummary>,
    pub spots: Vec<SpotSummary>,
    pub warnings: Vec<Warning>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Band given on the command line, if any.
    pub band: Option<f64>,
    pub alpha_levels: [f64; 3],
    pub min_conf: u32,
    pub min_size: usize,
    pub increments: usize,
}

impl RunConfig {
    pub fn new(band: Option<f64>, min_conf: u32, min_size: usize, increments: usize) -> Self {
        Self { band, alpha_levels: ALPHA_LEVELS, min_conf, min_size, increments }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSearch {
    pub rule: PeakRule,
    pub start_distance: f64,
    pub step: f64,
    pub n_locational_outliers: usize,
    pub curve: Vec<MoranResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdrSummary {
    pub alpha: f64,
    pub critical_p: f64,
    pub n_significant: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotSummary {
    pub spot_id: usize,
    pub polarity: Polarity,
    pub n_reports: usize,
    pub n_participants: usize,
    pub mean_experience: f64,
}

impl From<&Spot> for SpotSummary {
    fn from(s: &Spot) -> Self {
        Self {
            spot_id: s.spot_id,
            polarity: s.polarity,
            n_reports: s.n_reports,
            n_participants: s.n_participants,
            mean_experience: s.mean_experience,
        }
    }
}

pub fn bin_map(counts: [usize; 7]) -> BTreeMap<String, usize> {
    counts.iter().enumerate().map(|(k, &c)| ((k as i32 - 3).to_string(), c)).collect()
}
