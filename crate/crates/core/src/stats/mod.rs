//! Spatial statistics: fixed-band weights, Global Moran's I, incremental
//! band selection, Getis-Ord Gi*, FDR correction and confidence bins.

mod fdr;
mod gistar;
mod graph;
mod incremental;
mod moran;
mod normal;

pub use fdr::{classify, fdr_correct, Confidence, FdrLevel, FdrOutcome, ALPHA_LEVELS};
pub use gistar::{gi_star, GiResult, GiStarOutput};
pub use graph::{build_graph, NeighborGraph};
pub use incremental::{
    incremental_autocorrelation, select_peak, BandSelection, IncrementalConfig, PeakRule, DEFAULT_INCREMENTS,
    PEAK_ALPHA,
};
pub use moran::{morans_i, MoranResult};
pub use normal::two_sided_p;
