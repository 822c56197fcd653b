//! End-to-end optimized hot spot analysis: band selection, Gi*, FDR, bins.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Warning, RECOMMENDED_MIN_POINTS};
use crate::error::{Error, Result};
use crate::esm::EsmReport;
use crate::geo::{project, PlanarPoint, Projection, SpatialIndex};
use crate::stats::{
    build_graph, classify, gi_star, incremental_autocorrelation, BandSelection, FdrOutcome, GiResult,
    IncrementalConfig, NeighborGraph,
};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Fixed distance band in meters; `None` runs the incremental search.
    pub band: Option<f64>,
    pub incremental: IncrementalConfig,
}

#[derive(Debug, Clone)]
pub struct HotSpotAnalysis {
    pub band: f64,
    pub band_selection: Option<BandSelection>,
    pub graph: NeighborGraph,
    /// One entry per point, bins filled.
    pub results: Vec<GiResult>,
    pub fdr: FdrOutcome,
    pub warnings: Vec<Warning>,
}

impl HotSpotAnalysis {
    /// Point counts for bins −3..=+3, in that order.
    pub fn bin_counts(&self) -> [usize; 7] {
        let mut counts = [0usize; 7];
        for r in &self.results {
            counts[(r.bin + 3) as usize] += 1;
        }
        counts
    }

    pub fn n_significant(&self) -> usize {
        self.results.iter().filter(|r| r.bin != 0).count()
    }
}

pub fn analyze_points(points: &[PlanarPoint], values: &[f64], config: &AnalysisConfig) -> Result<HotSpotAnalysis> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if points.len() != values.len() {
        return Err(Error::InputMismatch(format!("{} points vs {} values", points.len(), values.len())));
    }
    let mut warnings = Vec::new();
    let (band, band_selection) = match config.band {
        Some(b) => {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidBand(b));
            }
            if points.len() < RECOMMENDED_MIN_POINTS {
                warnings.push(Warning::FewPoints { n: points.len(), recommended: RECOMMENDED_MIN_POINTS });
            }
            (b, None)
        }
        None => {
            let index = SpatialIndex::with_auto_cell_size(points.to_vec())?;
            let sel = incremental_autocorrelation(&index, values, &config.incremental)?;
            warnings.extend(sel.warnings.iter().cloned());
            (sel.chosen_band, Some(sel))
        }
    };

    let index = SpatialIndex::new(points.to_vec(), band)?;
    let graph = build_graph(&index, band, true)?;
    let gi = gi_star(values, &graph)?;
    warnings.extend(gi.warnings);
    let p: Vec<f64> = gi.results.iter().map(|r| r.p_two_sided).collect();
    let fdr = FdrOutcome::new(&p)?;
    let results = classify(&gi.results, &fdr)?;
    Ok(HotSpotAnalysis { band, band_selection, graph, results, fdr, warnings })
}

/// Reports projected to the plane together with their experience scores.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub planar: Vec<PlanarPoint>,
    pub projection: Projection,
    pub values: Vec<f64>,
}

pub fn prepare(reports: &[EsmReport]) -> Result<PreparedData> {
    let locations: Vec<_> = reports.iter().map(|r| r.location).collect();
    let (planar, projection) = project(&locations)?;
    let values = reports.iter().map(|r| r.experience().value()).collect();
    Ok(PreparedData { planar, projection, values })
}
