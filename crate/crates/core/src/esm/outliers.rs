use crate::error::{Error, Result};
use crate::geo::{PlanarPoint, SpatialIndex};

/// How many standard deviations above the mean nearest-neighbor distance a
/// point must sit to count as a locational outlier.
pub const OUTLIER_SD_MULTIPLIER: f64 = 3.0;

/// Ids of points whose nearest-neighbor distance exceeds
/// `mean(NN) + 3·SD(NN)` (population SD), sorted ascending.
///
/// Only used to calibrate the distance band; outliers stay in the analysis.
pub fn locational_outliers(points: &[PlanarPoint]) -> Result<Vec<usize>> {
    if points.len() < 4 {
        return Err(Error::InsufficientPoints { got: points.len(), need: 4 });
    }
    let index = SpatialIndex::with_auto_cell_size(points.to_vec())?;
    outliers_from_nn(&index.nearest_neighbor_distances()?)
}

/// Same rule applied to precomputed nearest-neighbor distances.
pub fn outliers_from_nn(nn: &[f64]) -> Result<Vec<usize>> {
    if nn.len() < 4 {
        return Err(Error::InsufficientPoints { got: nn.len(), need: 4 });
    }
    let n = nn.len() as f64;
    let mean = nn.iter().sum::<f64>() / n;
    let sd = (nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    // Relative slack keeps equal spacings (sd ~ rounding noise) from flagging.
    let threshold = mean + OUTLIER_SD_MULTIPLIER * sd + 1e-9 * mean.abs();
    Ok(nn.iter().enumerate().filter(|(_, &d)| d > threshold).map(|(i, _)| i).collect())
}
