//! Getis-Ord Gi* with binary fixed-band weights.
//!
//! For point `i` with neighborhood `N(i)` (itself included) of size `W`:
//!
//! ```text
//! z_i = (Σ_{j∈N(i)} x_j − x̄·W) / (S · sqrt((n·W − W²) / (n − 1)))
//! S   = sqrt(Σ x² / n − x̄²)
//! ```
//!
//! When `W = n` the denominator vanishes; such points get `z = 0` and an
//! [`Warning::AllNeighbors`] is raised.

use rayon::prelude::*;
use serde::Serialize;

use super::graph::NeighborGraph;
use super::normal::two_sided_p;
use crate::diagnostics::Warning;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiResult {
    pub point_id: usize,
    pub z: f64,
    pub p_two_sided: f64,
    /// Confidence bin in `-3..=3`; 0 until [`classify`](super::classify) runs.
    pub bin: i8,
    pub neighbor_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GiStarOutput {
    pub results: Vec<GiResult>,
    pub warnings: Vec<Warning>,
}

pub fn gi_star(values: &[f64], graph: &NeighborGraph) -> Result<GiStarOutput> {
    if !graph.include_self() {
        return Err(Error::InputMismatch("Gi* needs a graph that includes self-neighbors".into()));
    }
    let n = values.len();
    if graph.len() != n {
        return Err(Error::InputMismatch(format!("{n} values for {} graph nodes", graph.len())));
    }
    if n < 2 {
        return Err(Error::InsufficientPoints { got: n, need: 2 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateValues("non-finite value".into()));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    // Centred two-pass form of the population SD; keeps z exact under x -> a·x + b.
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let sd = (dev.iter().map(|d| d * d).sum::<f64>() / nf).sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateValues("all values are identical (zero variance)".into()));
    }

    let results: Vec<GiResult> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nb = graph.neighbors(i);
            let w = nb.len();
            let spread = w * (n - w);
            let z = if spread == 0 {
                0.0
            } else {
                let num: f64 = nb.iter().map(|&j| dev[j]).sum();
                num / (sd * (spread as f64 / (nf - 1.0)).sqrt())
            };
            GiResult { point_id: i, z, p_two_sided: two_sided_p(z), bin: 0, neighbor_count: w }
        })
        .collect();

    let mut warnings = Vec::new();
    let saturated = results.iter().filter(|r| r.neighbor_count == n).count();
    if saturated > 0 {
        warnings.push(Warning::AllNeighbors { n_points: saturated });
    }
    Ok(GiStarOutput { results, warnings })
}
