use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use super::{percentages, Polarity, Spot};
use crate::error::Result;
use crate::esm::EventCategory;

/// One line of the spot summary: a single spot or a per-polarity aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotRow {
    /// Spot number, or `hot_all` / `cold_all` for aggregate rows.
    pub label: String,
    pub polarity: Polarity,
    pub n_reports: usize,
    pub n_participants: usize,
    pub mean_experience: f64,
    pub event_profile: BTreeMap<EventCategory, f64>,
}

/// Descriptive summary of all spots, followed by one aggregate row per
/// polarity that has at least one spot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotTable {
    pub rows: Vec<SpotRow>,
}

pub fn spot_report(spots: &[Spot]) -> SpotTable {
    let mut rows: Vec<SpotRow> = spots
        .iter()
        .map(|s| SpotRow {
            label: s.spot_id.to_string(),
            polarity: s.polarity,
            n_reports: s.n_reports,
            n_participants: s.n_participants,
            mean_experience: s.mean_experience,
            event_profile: s.event_profile.clone(),
        })
        .collect();
    for polarity in [Polarity::Hot, Polarity::Cold] {
        let group: Vec<&Spot> = spots.iter().filter(|s| s.polarity == polarity).collect();
        if group.is_empty() {
            continue;
        }
        let n_reports: usize = group.iter().map(|s| s.n_reports).sum();
        let participants: BTreeSet<&String> = group.iter().flat_map(|s| s.participants.iter()).collect();
        let mut counts: BTreeMap<EventCategory, usize> = EventCategory::ALL.iter().map(|&c| (c, 0)).collect();
        for s in &group {
            for (c, k) in &s.event_counts {
                *counts.entry(*c).or_default() += k;
            }
        }
        let score_sum: f64 = group.iter().map(|s| s.mean_experience * s.n_reports as f64).sum();
        rows.push(SpotRow {
            label: format!("{}_all", polarity.as_str()),
            polarity,
            n_reports,
            n_participants: participants.len(),
            mean_experience: score_sum / n_reports as f64,
            event_profile: percentages(&counts, n_reports),
        });
    }
    SpotTable { rows }
}

impl SpotTable {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = ["spot_id", "polarity", "n_reports", "n_participants", "mean_experience"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(EventCategory::ALL.iter().map(|c| c.as_str().to_string()));
        h
    }

    /// CSV with percentages to one decimal and mean experience to three.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::header())?;
        for r in &self.rows {
            let mut rec = vec![
                r.label.clone(),
                r.polarity.as_str().to_string(),
                r.n_reports.to_string(),
                r.n_participants.to_string(),
                format!("{:.3}", r.mean_experience),
            ];
            rec.extend(
                EventCategory::ALL.iter().map(|c| format!("{:.1}", r.event_profile.get(c).copied().unwrap_or(0.0))),
            );
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
