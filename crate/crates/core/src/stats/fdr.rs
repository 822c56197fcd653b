//! Benjamini–Hochberg false discovery rate control and confidence binning.

use serde::{Deserialize, Serialize};

use super::gistar::GiResult;
use crate::error::{Error, Result};

/// The three significance levels behind the ±1/±2/±3 bins.
pub const ALPHA_LEVELS: [f64; 3] = [0.10, 0.05, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdrLevel {
    pub alpha: f64,
    /// Largest p-value rejected at this level, 0 when nothing is rejected.
    pub critical_p: f64,
    /// Rejected hypothesis ids, ascending.
    pub significant: Vec<usize>,
}

/// BH at a single level. Ties are broken by id so the outcome is deterministic.
pub fn fdr_correct(p_values: &[f64], alpha: f64) -> Result<FdrLevel> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} must lie in (0, 1)")));
    }
    if let Some(&p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidPValue(p));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));

    let k = (1..=m).rev().find(|&k| p_values[order[k - 1]] <= k as f64 * alpha / m as f64).unwrap_or(0);
    let critical_p = if k == 0 { 0.0 } else { p_values[order[k - 1]] };
    let mut significant = order[..k].to_vec();
    significant.sort_unstable();
    Ok(FdrLevel { alpha, critical_p, significant })
}

/// BH outcome at each of [`ALPHA_LEVELS`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdrOutcome {
    pub n_tests: usize,
    pub levels: Vec<FdrLevel>,
}

impl FdrOutcome {
    pub fn new(p_values: &[f64]) -> Result<Self> {
        let levels = ALPHA_LEVELS.iter().map(|&a| fdr_correct(p_values, a)).collect::<Result<Vec<_>>>()?;
        Ok(Self { n_tests: p_values.len(), levels })
    }

    pub fn level(&self, alpha: f64) -> Option<&FdrLevel> {
        self.levels.iter().find(|l| l.alpha == alpha)
    }

    /// Per-test strongest level passed: 3 for 0.01, 2 for 0.05, 1 for 0.10, else 0.
    pub fn strength(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.n_tests];
        for level in &self.levels {
            let s = match level.alpha {
                a if a <= 0.01 => 3,
                a if a <= 0.05 => 2,
                _ => 1,
            };
            for &i in &level.significant {
                out[i] = out[i].max(s);
            }
        }
        out
    }
}

/// Minimum confidence a point needs to count toward a spot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confidence {
    #[serde(rename = "90")]
    P90,
    #[serde(rename = "95")]
    P95,
    #[serde(rename = "99")]
    P99,
}

impl Confidence {
    pub fn from_percent(p: u32) -> Result<Self> {
        match p {
            90 => Ok(Confidence::P90),
            95 => Ok(Confidence::P95),
            99 => Ok(Confidence::P99),
            other => Err(Error::InvalidConfig(format!("confidence must be 90, 95 or 99, got {other}"))),
        }
    }

    pub fn percent(self) -> u32 {
        match self {
            Confidence::P90 => 90,
            Confidence::P95 => 95,
            Confidence::P99 => 99,
        }
    }

    /// Smallest `|bin|` meeting this confidence.
    pub fn min_bin(self) -> i8 {
        match self {
            Confidence::P90 => 1,
            Confidence::P95 => 2,
            Confidence::P99 => 3,
        }
    }
}

/// Fills `bin = sign(z) · strength` from the FDR outcome.
pub fn classify(gi: &[GiResult], fdr: &FdrOutcome) -> Result<Vec<GiResult>> {
    if gi.len() != fdr.n_tests {
        return Err(Error::InputMismatch(format!("{} Gi* results vs {} FDR tests", gi.len(), fdr.n_tests)));
    }
    let strength = fdr.strength();
    Ok(gi
        .iter()
        .map(|r| {
            let s = strength.get(r.point_id).copied().unwrap_or(0) as i8;
            let bin = if r.z > 0.0 {
                s
            } else if r.z < 0.0 {
                -s
            } else {
                0
            };
            GiResult { bin, ..r.clone() }
        })
        .collect())
}
