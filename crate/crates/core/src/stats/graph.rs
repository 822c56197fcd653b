use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::SpatialIndex;

/// Fixed-distance-band binary weights: `w_ij = 1` iff `dist(i, j) <= band`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    band: f64,
    include_self: bool,
    neighbors: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn band(&self) -> f64 {
        self.band
    }

    /// `true` for Gi* graphs (every point is its own neighbor).
    pub fn include_self(&self) -> bool {
        self.include_self
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Sorted neighbor ids of point `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    /// Sum of all weights (directed edge count, self-loops included).
    pub fn total_weight(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }
}

pub fn build_graph(index: &SpatialIndex, band: f64, include_self: bool) -> Result<NeighborGraph> {
    if !(band.is_finite() && band > 0.0) {
        return Err(Error::InvalidBand(band));
    }
    let neighbors = (0..index.len())
        .into_par_iter()
        .map(|i| {
            let mut list = index.radius_query(i, band)?;
            if !include_self {
                list.retain(|&j| j != i);
            }
            Ok(list)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NeighborGraph { band, include_self, neighbors })
}
