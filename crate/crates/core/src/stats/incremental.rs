//! Distance-band selection by incremental spatial autocorrelation.
//!
//! Global Moran's I is evaluated at `d0, d0 + step, …` and the band is taken
//! from the peak of the z-score curve:
//!
//! 1. the first interior local maximum, if it has `z > 0` and `p < 0.05`;
//! 2. otherwise, if z rose at every step, the last distance (with a
//!    [`Warning::MonotoneCurve`]);
//! 3. otherwise the distance of the global maximum (with a
//!    [`Warning::NoSignificantPeak`]).
//!
//! `d0` defaults to the mean nearest-neighbor distance over points that are
//! not locational outliers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moran::{deviations, moran_from_lags, MoranResult};
use crate::diagnostics::{Warning, RECOMMENDED_MIN_POINTS};
use crate::error::{Error, Result};
use crate::esm::outliers_from_nn;
use crate::geo::SpatialIndex;

pub const DEFAULT_INCREMENTS: usize = 10;
pub const PEAK_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalConfig {
    /// Number of distances evaluated, the start distance included.
    pub increments: usize,
    /// Overrides the mean nearest-neighbor start distance.
    pub start: Option<f64>,
    /// Overrides the step (defaults to the start distance).
    pub step: Option<f64>,
}

impl Default for IncrementalConfig {
    fn default() -> Self {
        Self { increments: DEFAULT_INCREMENTS, start: None, step: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakRule {
    FirstSignificantPeak,
    MonotoneLast,
    GlobalMaximum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSelection {
    pub chosen_band: f64,
    pub rule: PeakRule,
    pub start_distance: f64,
    pub step: f64,
    /// Locational outliers left out of the start-distance estimate.
    pub outliers: Vec<usize>,
    pub curve: Vec<MoranResult>,
    pub warnings: Vec<Warning>,
}

pub fn incremental_autocorrelation(
    index: &SpatialIndex,
    values: &[f64],
    config: &IncrementalConfig,
) -> Result<BandSelection> {
    let n = index.len();
    if values.len() != n {
        return Err(Error::InputMismatch(format!("{} values for {n} points", values.len())));
    }
    if config.increments == 0 {
        return Err(Error::InvalidConfig("increments must be >= 1".into()));
    }
    let dev = deviations(values)?;
    let mut warnings = Vec::new();
    if n < RECOMMENDED_MIN_POINTS {
        warnings.push(Warning::FewPoints { n, recommended: RECOMMENDED_MIN_POINTS });
    }

    let nn = index.nearest_neighbor_distances()?;
    let outliers = outliers_from_nn(&nn)?;
    let start = match config.start {
        Some(s) => s,
        None => {
            let mut is_outlier = vec![false; n];
            outliers.iter().for_each(|&i| is_outlier[i] = true);
            let kept: Vec<f64> = nn.iter().zip(&is_outlier).filter(|(_, o)| !**o).map(|(d, _)| *d).collect();
            kept.iter().sum::<f64>() / kept.len() as f64
        }
    };
    if !(start.is_finite() && start > 0.0) {
        return Err(Error::InvalidBand(start));
    }
    let step = config.step.unwrap_or(start);
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidConfig(format!("step {step} must be > 0")));
    }

    // Distances with too little neighbor structure for a defined Moran
    // variance are left off the curve.
    let distances: Vec<f64> = (0..config.increments).map(|k| start + k as f64 * step).collect();
    let (degrees, lags) = sweep_lags(index, &dev, &distances);
    let mut curve = Vec::with_capacity(distances.len());
    let mut skipped = Vec::new();
    for (k, &d) in distances.iter().enumerate() {
        match moran_from_lags(d, &dev, &degrees[k], &lags[k]) {
            Ok(m) => curve.push(m),
            Err(Error::NoNeighbors | Error::DegenerateValues(_)) => skipped.push(d),
            Err(e) => return Err(e),
        }
    }
    if curve.is_empty() {
        return Err(Error::NoNeighbors);
    }
    if !skipped.is_empty() {
        warnings.push(Warning::SkippedDistances { distances: skipped });
    }

    let (idx, rule) = select_peak(&curve);
    let chosen_band = curve[idx].distance;
    match rule {
        PeakRule::FirstSignificantPeak => {}
        PeakRule::MonotoneLast => warnings.push(Warning::MonotoneCurve { band: chosen_band }),
        PeakRule::GlobalMaximum => warnings.push(Warning::NoSignificantPeak { band: chosen_band }),
    }
    Ok(BandSelection { chosen_band, rule, start_distance: start, step, outliers, curve, warnings })
}

/// Neighbor counts and deviation lags (self excluded) of every point at
/// every distance, from a single radius query per point at the largest
/// distance. Each neighbor is credited to the first distance `d_k` with
/// `dist² ≤ d_k²`, then counts accumulate outward.
fn sweep_lags(index: &SpatialIndex, dev: &[f64], distances: &[f64]) -> (Vec<Vec<usize>>, Vec<Vec<f64>>) {
    let k_max = distances.len();
    let d_sq: Vec<f64> = distances.iter().map(|d| d * d).collect();
    let points = index.points();
    let per_point: Vec<(Vec<usize>, Vec<f64>)> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut deg = vec![0usize; k_max];
            let mut lag = vec![0.0; k_max];
            index.visit_within(&points[i], distances[k_max - 1], |j, dist_sq| {
                if j != i {
                    let k = d_sq.partition_point(|&t| t < dist_sq);
                    deg[k] += 1;
                    lag[k] += dev[j];
                }
            });
            for k in 1..k_max {
                deg[k] += deg[k - 1];
                lag[k] += lag[k - 1];
            }
            (deg, lag)
        })
        .collect();
    let degrees = (0..k_max).map(|k| per_point.iter().map(|(d, _)| d[k]).collect()).collect();
    let lags = (0..k_max).map(|k| per_point.iter().map(|(_, l)| l[k]).collect()).collect();
    (degrees, lags)
}

/// Index into `curve` of the selected distance and the rule that picked it.
pub fn select_peak(curve: &[MoranResult]) -> (usize, PeakRule) {
    let z: Vec<f64> = curve.iter().map(|m| m.z).collect();
    let k = z.len();
    if let Some(i) = (1..k.saturating_sub(1)).find(|&i| z[i] > z[i - 1] && z[i] >= z[i + 1]) {
        if z[i] > 0.0 && curve[i].p_two_sided < PEAK_ALPHA {
            return (i, PeakRule::FirstSignificantPeak);
        }
    }
    if k > 1 && z.windows(2).all(|w| w[1] > w[0]) {
        return (k - 1, PeakRule::MonotoneLast);
    }
    let best = (0..k).fold(0, |b, i| if z[i] > z[b] { i } else { b });
    (best, PeakRule::GlobalMaximum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::PlanarPoint;
    use crate::stats::graph::build_graph;
    use crate::stats::moran::morans_i;
    use crate::stats::normal::two_sided_p;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn moran(distance: f64, z: f64) -> MoranResult {
        MoranResult { distance, moran_i: 0.0, expected_i: 0.0, variance: 1.0, z, p_two_sided: two_sided_p(z) }
    }

    #[test]
    fn peak_rules() {
        let curve: Vec<MoranResult> =
            [1.0, 2.5, 2.0, 4.0, 3.0].iter().enumerate().map(|(i, &z)| moran(i as f64 + 1.0, z)).collect();
        assert_eq!(select_peak(&curve), (1, PeakRule::FirstSignificantPeak));

        // first local max not significant -> global maximum fallback
        let curve: Vec<MoranResult> =
            [1.0, 1.5, 1.2, 4.0, 3.0].iter().enumerate().map(|(i, &z)| moran(i as f64 + 1.0, z)).collect();
        assert_eq!(select_peak(&curve), (3, PeakRule::GlobalMaximum));

        let rising: Vec<MoranResult> = (0..5).map(|i| moran(i as f64 + 1.0, i as f64)).collect();
        assert_eq!(select_peak(&rising), (4, PeakRule::MonotoneLast));

        let noise: Vec<MoranResult> =
            [0.5, -0.2, 1.1, 0.3, 0.9].iter().enumerate().map(|(i, &z)| moran(i as f64 + 1.0, z)).collect();
        assert_eq!(select_peak(&noise), (2, PeakRule::GlobalMaximum));
    }

    fn gaussian_blobs(radius: f64, seed: u64) -> (Vec<PlanarPoint>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = [(2000.0, 2000.0, 1.5), (6000.0, 6000.0, -1.5), (2000.0, 6500.0, 1.5), (6500.0, 2000.0, -1.5)];
        let mut pts = Vec::new();
        let mut vals = Vec::new();
        for _ in 0..1500 {
            let p = PlanarPoint::new(rng.random_range(0.0..8000.0), rng.random_range(0.0..8000.0));
            let mut v = rng.random_range(-0.5..0.5);
            for (cx, cy, amp) in centers {
                let d2 = (p.x - cx).powi(2) + (p.y - cy).powi(2);
                v += amp * (-d2 / (2.0 * radius * radius)).exp();
            }
            pts.push(p);
            vals.push(v);
        }
        (pts, vals)
    }

    #[test]
    fn recovers_planted_scale() {
        for radius in [300.0, 700.0] {
            let (pts, vals) = gaussian_blobs(radius, 9);
            let idx = SpatialIndex::with_auto_cell_size(pts).unwrap();
            let sel = incremental_autocorrelation(&idx, &vals, &IncrementalConfig::default()).unwrap();
            assert!(
                sel.chosen_band >= 0.5 * radius && sel.chosen_band <= 3.0 * radius,
                "radius {radius}: band {} ({:?})",
                sel.chosen_band,
                sel.rule
            );
        }
    }

    #[test]
    fn curve_matches_graph_based_moran() {
        let (pts, vals) = gaussian_blobs(500.0, 10);
        let idx = SpatialIndex::with_auto_cell_size(pts).unwrap();
        let sel = incremental_autocorrelation(&idx, &vals, &IncrementalConfig { increments: 4, ..Default::default() })
            .unwrap();
        assert_eq!(sel.curve.len(), 4);
        for m in &sel.curve {
            let g = build_graph(&idx, m.distance, false).unwrap();
            let direct = morans_i(&vals, &g).unwrap();
            assert!((direct.moran_i - m.moran_i).abs() < 1e-10);
            assert!((direct.z - m.z).abs() < 1e-8);
        }
        assert!((sel.curve[1].distance - 2.0 * sel.start_distance).abs() < 1e-9);
    }

    #[test]
    fn start_distance_ignores_outliers() {
        let mut pts: Vec<PlanarPoint> =
            (0..10).flat_map(|i| (0..10).map(move |j| PlanarPoint::new(i as f64 * 20.0, j as f64 * 20.0))).collect();
        pts.push(PlanarPoint::new(90_000.0, 0.0));
        let vals: Vec<f64> = (0..pts.len()).map(|i| (i % 7) as f64).collect();
        let idx = SpatialIndex::with_auto_cell_size(pts).unwrap();
        let sel = incremental_autocorrelation(&idx, &vals, &IncrementalConfig::default()).unwrap();
        assert_eq!(sel.outliers, vec![100]);
        assert!((sel.start_distance - 20.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_config_errors() {
        let (pts, _) = gaussian_blobs(500.0, 11);
        let idx = SpatialIndex::with_auto_cell_size(pts).unwrap();
        let flat = vec![3.0; idx.len()];
        assert!(matches!(
            incremental_autocorrelation(&idx, &flat, &IncrementalConfig::default()),
            Err(Error::DegenerateValues(_))
        ));
        let vals: Vec<f64> = (0..idx.len()).map(|i| i as f64).collect();
        let cfg = IncrementalConfig { increments: 0, ..Default::default() };
        assert!(matches!(incremental_autocorrelation(&idx, &vals, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn few_points_warns() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts: Vec<PlanarPoint> =
            (0..12).map(|_| PlanarPoint::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect();
        let vals: Vec<f64> = pts.iter().map(|p| p.x).collect();
        let idx = SpatialIndex::with_auto_cell_size(pts).unwrap();
        let sel = incremental_autocorrelation(&idx, &vals, &IncrementalConfig::default()).unwrap();
        assert!(sel.warnings.contains(&Warning::FewPoints { n: 12, recommended: 30 }));
    }

    #[test]
    fn pure_noise_rarely_has_a_significant_peak() {
        let runs = 60;
        let mut significant = 0;
        for seed in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let pts: Vec<PlanarPoint> = (0..300)
                .map(|_| PlanarPoint::new(rng.random_range(0.0..5000.0), rng.random_range(0.0..5000.0)))
                .collect();
            let vals: Vec<f64> = (0..300).map(|_| rng.random_range(0.0..1.0)).collect();
            let idx = SpatialIndex::with_auto_cell_size(pts).unwrap();
            let sel = incremental_autocorrelation(&idx, &vals, &IncrementalConfig::default()).unwrap();
            match sel.rule {
                PeakRule::FirstSignificantPeak => significant += 1,
                _ => assert!(!sel.warnings.is_empty()),
            }
        }
        assert!(significant as f64 <= 0.1 * runs as f64, "{significant}/{runs} runs had a significant peak");
    }
}
