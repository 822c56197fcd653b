//! GeoJSON (RFC 7946) export of analyzed points and spot polygons.
//!
//! Coordinates are WGS84 `[lon, lat]`. Point features carry the report's
//! Gi* result; polygon features carry the full spot profile.

use serde_json::{json, Map, Value};

use super::Spot;
use crate::error::{Error, Result};
use crate::esm::EsmReport;
use crate::geo::Projection;
use crate::stats::GiResult;

/// Decimal degrees are rounded to 1e-7 (about 1 cm) to keep output compact.
fn coord(lon: f64, lat: f64) -> Value {
    let r = |v: f64| (v * 1e7).round() / 1e7;
    json!([r(lon), r(lat)])
}

/// One Point feature per analyzed report. `membership[i]` is the spot id of
/// point `i`, if any.
pub fn points_collection(reports: &[EsmReport], results: &[GiResult], membership: &[Option<usize>]) -> Result<Value> {
    if reports.len() != results.len() || reports.len() != membership.len() {
        return Err(Error::InputMismatch(format!(
            "{} reports, {} results, {} membership entries",
            reports.len(),
            results.len(),
            membership.len()
        )));
    }
    let features: Vec<Value> = reports
        .iter()
        .zip(results)
        .zip(membership)
        .map(|((rep, gi), spot)| {
            let mut props = Map::new();
            props.insert("report_id".into(), json!(rep.report_id));
            props.insert("participant_id".into(), json!(rep.participant_id));
            props.insert("experience".into(), json!(rep.experience().value()));
            props.insert("z".into(), json!(gi.z));
            props.insert("p".into(), json!(gi.p_two_sided));
            props.insert("bin".into(), json!(gi.bin));
            props.insert("neighbor_count".into(), json!(gi.neighbor_count));
            if let Some(id) = spot {
                props.insert("spot_id".into(), json!(id));
            }
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": coord(rep.location.lon, rep.location.lat) },
                "properties": props,
            })
        })
        .collect();
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

/// One Polygon feature per spot, hull inverse-projected and closed.
pub fn spots_collection(spots: &[Spot], projection: &Projection) -> Value {
    let features: Vec<Value> = spots
        .iter()
        .map(|s| {
            let mut ring: Vec<Value> = s
                .hull
                .iter()
                .map(|p| {
                    let g = projection.inverse(p);
                    coord(g.lon, g.lat)
                })
                .collect();
            if let Some(first) = ring.first().cloned() {
                ring.push(first);
            }
            let profile: Map<String, Value> =
                s.event_profile.iter().map(|(c, v)| (c.as_str().to_string(), json!(v))).collect();
            let counts: Map<String, Value> =
                s.event_counts.iter().map(|(c, v)| (c.as_str().to_string(), json!(v))).collect();
            json!({
                "type": "Feature",
                "geometry": { "type": "Polygon", "coordinates": [ring] },
                "properties": {
                    "spot_id": s.spot_id,
                    "polarity": s.polarity.as_str(),
                    "n_reports": s.n_reports,
                    "n_participants": s.n_participants,
                    "mean_experience": s.mean_experience,
                    "event_profile": profile,
                    "event_counts": counts,
                    "member_ids": s.member_ids,
                },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esm::EventCategory;
    use crate::geo::{GeoPoint, PlanarPoint};
    use crate::spots::{percentages, Polarity};
    use chrono::{TimeZone, Utc};
    use std::collections::BTreeMap;

    fn report(i: usize) -> EsmReport {
        EsmReport {
            report_id: format!("r{i}"),
            participant_id: "p".into(),
            trip_id: "t".into(),
            timestamp: Utc.with_ymd_and_hms(2025, 5, 1, 12, 0, 0).unwrap(),
            location: GeoPoint { lat: 53.55 + i as f64 * 1e-4, lon: 9.99 },
            items: [3.0; 8],
            events: Default::default(),
            free_text_category: None,
        }
    }

    #[test]
    fn point_features_carry_results() {
        let reports = vec![report(0), report(1)];
        let results = vec![
            GiResult { point_id: 0, z: 2.5, p_two_sided: 0.012, bin: 2, neighbor_count: 2 },
            GiResult { point_id: 1, z: 0.1, p_two_sided: 0.9, bin: 0, neighbor_count: 2 },
        ];
        let fc = points_collection(&reports, &results, &[Some(1), None]).unwrap();
        let f = fc["features"].as_array().unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0]["geometry"]["coordinates"], json!([9.99, 53.55]));
        assert_eq!(f[0]["properties"]["spot_id"], json!(1));
        assert_eq!(f[0]["properties"]["bin"], json!(2));
        assert!(f[1]["properties"].get("spot_id").is_none());
        assert!(points_collection(&reports, &results[..1], &[None]).is_err());
    }

    #[test]
    fn spot_polygons_are_closed_rings_in_wgs84() {
        let projection = Projection::new(GeoPoint { lat: 53.55, lon: 9.99 });
        let hull = vec![PlanarPoint::new(0.0, 0.0), PlanarPoint::new(100.0, 0.0), PlanarPoint::new(0.0, 100.0)];
        let counts: BTreeMap<EventCategory, usize> = EventCategory::ALL.iter().map(|&c| (c, 1)).collect();
        let spot = Spot {
            spot_id: 1,
            polarity: Polarity::Hot,
            member_ids: vec![0, 1, 2],
            hull,
            n_reports: 3,
            n_participants: 1,
            mean_experience: 4.0,
            event_profile: percentages(&counts, 3),
            event_counts: counts,
            participants: Default::default(),
        };
        let fc = spots_collection(&[spot], &projection);
        let ring = fc["features"][0]["geometry"]["coordinates"][0].as_array().unwrap();
        assert_eq!(ring.len(), 4);
        assert_eq!(ring[0], ring[3]);
        assert_eq!(ring[0], json!([9.99, 53.55]));
        // 100 m north is ~0.0009 degrees of latitude
        let lat = ring[2][1].as_f64().unwrap();
        assert!((lat - 53.55 - 100.0 / 111_194.9).abs() < 1e-6);
        let props = &fc["features"][0]["properties"];
        assert_eq!(props["polarity"], json!("hot"));
        assert_eq!(props["event_profile"].as_object().unwrap().len(), 15);
    }
}
