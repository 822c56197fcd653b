//! Detection and profiling of hot and cold spots in geo-referenced
//! experience-sampling (ESM) reports.
//!
//! The pipeline mirrors an optimized Getis-Ord Gi* hot spot analysis:
//!
//! 1. [`esm::parse_reports`] ingests questionnaires and [`analysis::prepare`]
//!    projects them to a local plane and scores each report (mean of its 8 items).
//! 2. [`stats::incremental_autocorrelation`] sweeps Global Moran's I over
//!    increasing distances and picks the fixed distance band at the z-score peak.
//! 3. [`stats::gi_star`] computes a Gi* z-score per report over that band;
//!    [`stats::FdrOutcome`] applies Benjamini–Hochberg at 10/5/1 % and
//!    [`stats::classify`] assigns the ±1/±2/±3 confidence bins.
//! 4. [`spots::group_spots`] joins significant same-sign points into numbered
//!    spots with hulls and event profiles; [`spots::geojson`] and
//!    [`spots::SpotTable`] export them.
//!
//! [`synth`] generates datasets with planted clusters and runs the calibration
//! experiments used to validate the whole chain.

pub mod analysis;
pub mod diagnostics;
pub mod error;
pub mod esm;
pub mod geo;
pub mod spots;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
