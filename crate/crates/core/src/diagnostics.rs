//! Non-fatal conditions reported alongside results.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Fewer points than the recommended minimum for a stable analysis.
    FewPoints { n: usize, recommended: usize },
    /// The Moran z-score curve rose at every step; the last distance was used.
    MonotoneCurve { band: f64 },
    /// No local maximum of the Moran curve was significant; the global maximum was used.
    NoSignificantPeak { band: f64 },
    /// Sweep distances where Moran's I was undefined (too few neighbor pairs).
    SkippedDistances { distances: Vec<f64> },
    /// Points whose neighborhood covers the whole dataset; their Gi* z is set to 0.
    AllNeighbors { n_points: usize },
}

/// Below this many reports results are computed but flagged.
pub const RECOMMENDED_MIN_POINTS: usize = 30;

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::FewPoints { n, recommended } => {
                write!(f, "only {n} points; at least {recommended} are recommended")
            }
            Warning::MonotoneCurve { band } => {
                write!(f, "Moran z rose at every distance; using the last distance {band:.1} m")
            }
            Warning::NoSignificantPeak { band } => {
                write!(f, "no significant Moran peak; using the maximum at {band:.1} m")
            }
            Warning::SkippedDistances { distances } => {
                write!(f, "Moran's I undefined at {} distance(s), skipped", distances.len())
            }
            Warning::AllNeighbors { n_points } => {
                write!(f, "{n_points} point(s) neighbor the whole dataset; their Gi* z is 0")
            }
        }
    }
}
