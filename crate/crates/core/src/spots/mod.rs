//! Grouping significant points into numbered hot and cold spots.
//!
//! Significant points (|bin| at or above the minimum confidence) are linked
//! when they lie within the analysis band of each other and share a sign.
//! Each connected component with at least `min_size` members becomes a
//! [`Spot`]. Spots are numbered 1.. by descending report count.

pub mod geojson;
mod hull;
mod table;

pub use hull::{contains, convex_hull, hull_polygon, signed_area, DEGENERATE_BUFFER_M};
pub use table::{spot_report, SpotRow, SpotTable};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::esm::{EsmReport, EventCategory};
use crate::geo::PlanarPoint;
use crate::stats::{Confidence, GiResult, NeighborGraph};

pub const DEFAULT_MIN_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Hot,
    Cold,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Hot => "hot",
            Polarity::Cold => "cold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spot {
    pub spot_id: usize,
    pub polarity: Polarity,
    /// Point ids, ascending.
    pub member_ids: Vec<usize>,
    /// Open counter-clockwise ring in planar coordinates.
    pub hull: Vec<PlanarPoint>,
    pub n_reports: usize,
    pub n_participants: usize,
    pub mean_experience: f64,
    /// Percentage of member reports flagging each event, all 15 categories present.
    pub event_profile: BTreeMap<EventCategory, f64>,
    pub event_counts: BTreeMap<EventCategory, usize>,
    #[serde(skip)]
    pub participants: BTreeSet<String>,
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Builds spots from classified Gi* results. All slices are indexed by point id.
pub fn group_spots(
    results: &[GiResult],
    graph: &NeighborGraph,
    reports: &[EsmReport],
    points: &[PlanarPoint],
    min_conf: Confidence,
    min_size: usize,
) -> Result<Vec<Spot>> {
    if min_size < 1 {
        return Err(Error::InvalidConfig("min_size must be >= 1".into()));
    }
    let n = results.len();
    if graph.len() != n || reports.len() != n || points.len() != n {
        return Err(Error::InputMismatch(format!(
            "{n} results, {} graph nodes, {} reports, {} points",
            graph.len(),
            reports.len(),
            points.len()
        )));
    }
    if let Some((i, r)) = results.iter().enumerate().find(|(i, r)| r.point_id != *i) {
        return Err(Error::InputMismatch(format!("result {i} carries point_id {}", r.point_id)));
    }

    let min_bin = min_conf.min_bin();
    let sign = |i: usize| -> i8 {
        let b = results[i].bin;
        if b.abs() >= min_bin {
            b.signum()
        } else {
            0
        }
    };

    let mut sets = DisjointSet::new(n);
    for i in (0..n).filter(|&i| sign(i) != 0) {
        for &j in graph.neighbors(i) {
            if j > i && sign(j) == sign(i) {
                sets.union(i, j);
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in (0..n).filter(|&i| sign(i) != 0) {
        components.entry(sets.find(i)).or_default().push(i);
    }

    let mut spots: Vec<Spot> = components
        .into_values()
        .filter(|m| m.len() >= min_size)
        .map(|members| {
            let polarity = if sign(members[0]) > 0 { Polarity::Hot } else { Polarity::Cold };
            build_spot(polarity, members, reports, points)
        })
        .collect();

    spots.sort_by(|a, b| {
        b.n_reports.cmp(&a.n_reports).then(a.polarity.cmp(&b.polarity)).then(a.member_ids[0].cmp(&b.member_ids[0]))
    });
    for (k, s) in spots.iter_mut().enumerate() {
        s.spot_id = k + 1;
    }
    Ok(spots)
}

fn build_spot(polarity: Polarity, member_ids: Vec<usize>, reports: &[EsmReport], points: &[PlanarPoint]) -> Spot {
    let member_points: Vec<PlanarPoint> = member_ids.iter().map(|&i| points[i]).collect();
    let n_reports = member_ids.len();
    let participants: BTreeSet<String> = member_ids.iter().map(|&i| reports[i].participant_id.clone()).collect();
    let mut event_counts: BTreeMap<EventCategory, usize> = EventCategory::ALL.iter().map(|&c| (c, 0)).collect();
    let mut score_sum = 0.0;
    for &i in &member_ids {
        score_sum += reports[i].experience().value();
        for e in &reports[i].events {
            *event_counts.entry(*e).or_default() += 1;
        }
    }
    let event_profile = percentages(&event_counts, n_reports);
    Spot {
        spot_id: 0,
        polarity,
        hull: hull_polygon(&member_points),
        n_reports,
        n_participants: participants.len(),
        mean_experience: score_sum / n_reports as f64,
        event_profile,
        event_counts,
        participants,
        member_ids,
    }
}

pub(crate) fn percentages(counts: &BTreeMap<EventCategory, usize>, n: usize) -> BTreeMap<EventCategory, f64> {
    counts.iter().map(|(&c, &k)| (c, if n == 0 { 0.0 } else { 100.0 * k as f64 / n as f64 })).collect()
}

/// Spot id per point (`None` for points outside every spot).
pub fn membership(spots: &[Spot], n_points: usize) -> Vec<Option<usize>> {
    let mut out = vec![None; n_points];
    for s in spots {
        for &i in &s.member_ids {
            out[i] = Some(s.spot_id);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esm::EsmReport;
    use crate::geo::{GeoPoint, SpatialIndex};
    use crate::stats::build_graph;
    use chrono::{TimeZone, Utc};

    fn report(i: usize, participant: usize, events: &[EventCategory], score: f64) -> EsmReport {
        EsmReport {
            report_id: format!("r{i}"),
            participant_id: format!("p{participant}"),
            trip_id: "t".into(),
            timestamp: Utc.with_ymd_and_hms(2025, 5, 1, 12, 0, 0).unwrap(),
            location: GeoPoint { lat: 53.5, lon: 10.0 },
            items: [score; 8],
            events: events.iter().copied().collect(),
            free_text_category: None,
        }
    }

    fn gi(i: usize, bin: i8) -> GiResult {
        GiResult { point_id: i, z: bin as f64, p_two_sided: 0.0, bin, neighbor_count: 1 }
    }

    struct Fixture {
        points: Vec<PlanarPoint>,
        reports: Vec<EsmReport>,
        results: Vec<GiResult>,
        graph: NeighborGraph,
    }

    /// Two tight groups of 10 far apart (hot then cold) plus 5 insignificant points.
    fn fixture() -> Fixture {
        let mut points = Vec::new();
        let mut results = Vec::new();
        let mut reports = Vec::new();
        for k in 0..10 {
            points.push(PlanarPoint::new(k as f64 * 20.0, (k % 3) as f64 * 15.0));
            let ev: &[EventCategory] = if k < 3 { &[EventCategory::Delay] } else { &[] };
            reports.push(report(k, k % 5, ev, 4.5));
            results.push(gi(k, if k % 2 == 0 { 3 } else { 1 }));
        }
        for k in 10..22 {
            points.push(PlanarPoint::new(5000.0 + (k - 10) as f64 * 20.0, 0.0));
            reports.push(report(k, 7, &[EventCategory::Overcrowded], 1.5));
            results.push(gi(k, -2));
        }
        for k in 22..27 {
            points.push(PlanarPoint::new(2500.0, (k - 22) as f64 * 20.0));
            reports.push(report(k, 9, &[], 3.0));
            results.push(gi(k, 0));
        }
        let graph = build_graph(&SpatialIndex::new(points.clone(), 100.0).unwrap(), 100.0, true).unwrap();
        Fixture { points, reports, results, graph }
    }

    #[test]
    fn groups_two_clusters() {
        let f = fixture();
        let spots = group_spots(&f.results, &f.graph, &f.reports, &f.points, Confidence::P90, 5).unwrap();
        assert_eq!(spots.len(), 2);
        // the cold group has more reports and is numbered first
        assert_eq!((spots[0].spot_id, spots[0].polarity, spots[0].n_reports), (1, Polarity::Cold, 12));
        assert_eq!((spots[1].spot_id, spots[1].polarity, spots[1].n_reports), (2, Polarity::Hot, 10));
        let hot = &spots[1];
        assert_eq!(hot.n_participants, 5);
        assert_eq!(hot.event_profile[&EventCategory::Delay], 30.0);
        assert_eq!(hot.event_profile.len(), 15);
        assert_eq!(hot.mean_experience, 4.5);
        assert_eq!(spots[0].event_profile[&EventCategory::Overcrowded], 100.0);
        assert_eq!(spots[0].n_participants, 1);
        for s in &spots {
            for &i in &s.member_ids {
                assert!(contains(&s.hull, &f.points[i], 1e-6));
            }
        }
    }

    #[test]
    fn confidence_threshold_splits_components() {
        let f = fixture();
        // At 99% only even-indexed hot points remain; at 20 m spacing they sit
        // 40 m apart (still linked), so the hot spot shrinks to 5 members.
        let spots = group_spots(&f.results, &f.graph, &f.reports, &f.points, Confidence::P99, 5).unwrap();
        assert_eq!(spots.len(), 1);
        assert_eq!(spots[0].member_ids, vec![0, 2, 4, 6, 8]);
        let spots = group_spots(&f.results, &f.graph, &f.reports, &f.points, Confidence::P99, 6).unwrap();
        assert!(spots.is_empty());
    }

    #[test]
    fn no_significant_points_means_no_spots() {
        let mut f = fixture();
        f.results.iter_mut().for_each(|r| r.bin = 0);
        assert!(group_spots(&f.results, &f.graph, &f.reports, &f.points, Confidence::P90, 1).unwrap().is_empty());
    }

    #[test]
    fn opposite_signs_never_merge() {
        let points = vec![PlanarPoint::new(0.0, 0.0), PlanarPoint::new(1.0, 0.0), PlanarPoint::new(2.0, 0.0)];
        let reports: Vec<EsmReport> = (0..3).map(|i| report(i, i, &[], 3.0)).collect();
        let results = vec![gi(0, 1), gi(1, -1), gi(2, 1)];
        let graph = build_graph(&SpatialIndex::new(points.clone(), 10.0).unwrap(), 10.0, true).unwrap();
        let spots = group_spots(&results, &graph, &reports, &points, Confidence::P90, 1).unwrap();
        assert_eq!(spots.len(), 2);
        assert_eq!(spots[0].member_ids, vec![0, 2]);
        assert_eq!(spots[1].member_ids, vec![1]);
        // single location -> buffered disc
        assert!(signed_area(&spots[1].hull) > 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let f = fixture();
        assert!(matches!(
            group_spots(&f.results, &f.graph, &f.reports, &f.points, Confidence::P90, 0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            group_spots(&f.results[..5], &f.graph, &f.reports, &f.points, Confidence::P90, 5),
            Err(Error::InputMismatch(_))
        ));
    }

    #[test]
    fn membership_map() {
        let f = fixture();
        let spots = group_spots(&f.results, &f.graph, &f.reports, &f.points, Confidence::P90, 5).unwrap();
        let m = membership(&spots, f.points.len());
        assert_eq!(m[0], Some(2));
        assert_eq!(m[10], Some(1));
        assert_eq!(m[25], None);
    }
}
