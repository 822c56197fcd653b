//! Reading and writing the report CSV format.
//!
//! Header (exact):
//! `report_id,participant_id,trip_id,timestamp_utc,lat,lon,item1,...,item8,events,free_text_category`
//!
//! `events` is a `|`-separated list of event tokens, `timestamp_utc` is RFC 3339.

use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use super::report::{EsmReport, EventCategory, N_ITEMS};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;

pub const HEADER: [&str; 16] = [
    "report_id",
    "participant_id",
    "trip_id",
    "timestamp_utc",
    "lat",
    "lon",
    "item1",
    "item2",
    "item3",
    "item4",
    "item5",
    "item6",
    "item7",
    "item8",
    "events",
    "free_text_category",
];

/// A row that failed validation. `row_number` is the 1-based line of the
/// record in the source file (the header is line 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub row_number: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedReports {
    pub reports: Vec<EsmReport>,
    pub rejections: Vec<Rejection>,
}

/// Parses a report CSV. Malformed rows are collected as rejections; the call
/// only fails when the header is unusable or the file has no data rows. When
/// every row is rejected the result has no reports but keeps the rejections.
pub fn parse_reports<R: Read>(source: R) -> Result<ParsedReports> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(source);

    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyDataset);
    }
    let mut columns = [0usize; 16];
    for (slot, name) in columns.iter_mut().zip(HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::SchemaError(format!("missing column '{name}'")))?;
    }

    let mut out = ParsedReports::default();
    let mut seen_ids = HashSet::new();
    let mut record = csv::StringRecord::new();
    let mut fallback_line = 1u64;
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                fallback_line += 1;
                let line = record.position().map(|p| p.line()).unwrap_or(fallback_line);
                match parse_row(&record, &columns) {
                    Ok(report) => {
                        if seen_ids.insert(report.report_id.clone()) {
                            out.reports.push(report);
                        } else {
                            out.rejections.push(Rejection {
                                row_number: line,
                                reason: format!("duplicate report_id '{}'", report.report_id),
                            });
                        }
                    }
                    Err(reason) => out.rejections.push(Rejection { row_number: line, reason }),
                }
            }
            Err(e) => {
                fallback_line += 1;
                let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
                out.rejections.push(Rejection { row_number: line, reason: format!("unreadable row: {e}") });
            }
        }
    }

    if out.reports.is_empty() && out.rejections.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

fn parse_row(record: &csv::StringRecord, columns: &[usize; 16]) -> std::result::Result<EsmReport, String> {
    let field = |k: usize| -> std::result::Result<&str, String> {
        record.get(columns[k]).ok_or_else(|| format!("row has {} fields, expected {}", record.len(), HEADER.len()))
    };
    let non_empty = |k: usize| -> std::result::Result<String, String> {
        let v = field(k)?;
        if v.is_empty() {
            Err(format!("missing {}", HEADER[k]))
        } else {
            Ok(v.to_string())
        }
    };
    let number = |k: usize| -> std::result::Result<f64, String> {
        let v = field(k)?;
        if v.is_empty() {
            return Err(format!("missing {}", HEADER[k]));
        }
        v.parse::<f64>().map_err(|_| format!("{} is not a number: '{v}'", HEADER[k]))
    };

    let report_id = non_empty(0)?;
    let participant_id = non_empty(1)?;
    let trip_id = non_empty(2)?;
    let ts = non_empty(3)?;
    let timestamp = DateTime::parse_from_rfc3339(&ts)
        .map_err(|e| format!("timestamp_utc '{ts}' is not RFC 3339: {e}"))?
        .with_timezone(&Utc);
    let location = GeoPoint::new(number(4)?, number(5)?).map_err(|e| e.to_string())?;

    let mut items = [0.0; N_ITEMS];
    for (k, slot) in items.iter_mut().enumerate() {
        let v = number(6 + k)?;
        if !v.is_finite() || !(1.0..=5.0).contains(&v) {
            return Err(format!("item out of [1,5] (item{} = {v})", k + 1));
        }
        *slot = v;
    }

    let mut events = BTreeSet::new();
    let raw_events = field(14)?;
    if !raw_events.is_empty() {
        for token in raw_events.split('|').map(str::trim).filter(|t| !t.is_empty()) {
            events.insert(token.parse::<EventCategory>().map_err(|e| e.to_string())?);
        }
    }
    let free_text_category = Some(field(15)?).filter(|s| !s.is_empty()).map(str::to_string);

    Ok(EsmReport { report_id, participant_id, trip_id, timestamp, location, items, events, free_text_category })
}

/// Writes reports in the same format [`parse_reports`] reads.
pub fn write_reports<W: Write>(sink: W, reports: &[EsmReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in reports {
        let mut row: Vec<String> = Vec::with_capacity(HEADER.len());
        row.push(r.report_id.clone());
        row.push(r.participant_id.clone());
        row.push(r.trip_id.clone());
        row.push(r.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true));
        row.push(r.location.lat.to_string());
        row.push(r.location.lon.to_string());
        row.extend(r.items.iter().map(f64::to_string));
        row.push(r.events.iter().map(EventCategory::as_str).collect::<Vec<_>>().join("|"));
        row.push(r.free_text_category.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rejections<W: Write>(sink: W, rejections: &[Rejection]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["row_number", "reason"])?;
    for r in rejections {
        w.write_record([r.row_number.to_string(), r.reason.clone()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "report_id,participant_id,trip_id,timestamp_utc,lat,lon,item1,item2,item3,item4,item5,item6,item7,item8,events,free_text_category\n";

    #[test]
    fn maps_fields_directly() {
        let data = format!("{HEAD}r1,p1,t1,2025-03-01T08:00:00Z,53.55,9.99,3,3,3,3,3,3,3,3,delay|overcrowded,\n");
        let parsed = parse_reports(data.as_bytes()).unwrap();
        assert!(parsed.rejections.is_empty());
        let r = &parsed.reports[0];
        assert_eq!(r.report_id, "r1");
        assert_eq!(r.items, [3.0; 8]);
        assert_eq!(r.events, BTreeSet::from([EventCategory::Delay, EventCategory::Overcrowded]));
        assert_eq!(r.free_text_category, None);
        assert_eq!(r.location, GeoPoint { lat: 53.55, lon: 9.99 });
    }

    #[test]
    fn rejects_out_of_range_item_with_row_number() {
        let data = format!(
            "{HEAD}r1,p1,t1,2025-03-01T08:00:00Z,53.55,9.99,3,3,3,3,3,3,3,3,,\n\
             r2,p1,t1,2025-03-01T08:05:00Z,53.55,9.99,3,3,6,3,3,3,3,3,,\n"
        );
        let parsed = parse_reports(data.as_bytes()).unwrap();
        assert_eq!(parsed.reports.len(), 1);
        assert_eq!(parsed.rejections.len(), 1);
        assert_eq!(parsed.rejections[0].row_number, 3);
        assert!(parsed.rejections[0].reason.starts_with("item out of [1,5]"));
    }

    #[test]
    fn rejects_missing_item_unknown_event_bad_coords_and_duplicates() {
        let data = format!(
            "{HEAD}r1,p1,t1,2025-03-01T08:00:00Z,53.55,9.99,3,3,3,3,3,3,3,3,,\n\
             r2,p1,t1,2025-03-01T08:05:00Z,53.55,9.99,3,,3,3,3,3,3,3,,\n\
             r3,p1,t1,2025-03-01T08:05:00Z,53.55,9.99,3,3,3,3,3,3,3,3,late,\n\
             r4,p1,t1,2025-03-01T08:05:00Z,93.55,9.99,3,3,3,3,3,3,3,3,,\n\
             r1,p1,t1,2025-03-01T08:05:00Z,53.55,9.99,3,3,3,3,3,3,3,3,,\n\
             r5,p1,t1,yesterday,53.55,9.99,3,3,3,3,3,3,3,3,,\n\
             r6,p1,t1\n"
        );
        let parsed = parse_reports(data.as_bytes()).unwrap();
        assert_eq!(parsed.reports.len(), 1);
        let rows: Vec<u64> = parsed.rejections.iter().map(|r| r.row_number).collect();
        assert_eq!(rows, vec![3, 4, 5, 6, 7, 8]);
        assert!(parsed.rejections[0].reason.contains("missing item2"));
        assert!(parsed.rejections[1].reason.contains("late"));
        assert!(parsed.rejections[3].reason.contains("duplicate"));
    }

    #[test]
    fn missing_column_is_schema_error() {
        let data = "report_id,participant_id\nr1,p1\n";
        assert!(matches!(parse_reports(data.as_bytes()), Err(Error::SchemaError(_))));
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(parse_reports("".as_bytes()).unwrap_err(), Error::EmptyDataset);
        assert_eq!(parse_reports(HEAD.as_bytes()).unwrap_err(), Error::EmptyDataset);
        let bad = format!("{HEAD}r1,p1,t1,2025-03-01T08:00:00Z,53.55,9.99,9,3,3,3,3,3,3,3,,\n");
        let parsed = parse_reports(bad.as_bytes()).unwrap();
        assert!(parsed.reports.is_empty());
        assert_eq!(parsed.rejections, vec![Rejection { row_number: 2, reason: parsed.rejections[0].reason.clone() }]);
    }

    #[test]
    fn columns_may_be_reordered() {
        let data = "free_text_category,events,item8,item7,item6,item5,item4,item3,item2,item1,lon,lat,timestamp_utc,trip_id,participant_id,report_id\n\
                    polite staff,comfort,5,4,4,4,4,4,4,1,10.0,53.5,2025-03-01T08:00:00+01:00,t,p,r\n";
        let r = &parse_reports(data.as_bytes()).unwrap().reports[0];
        assert_eq!(r.items[0], 1.0);
        assert_eq!(r.items[7], 5.0);
        assert_eq!(r.free_text_category.as_deref(), Some("polite staff"));
        assert_eq!(r.timestamp.to_rfc3339(), "2025-03-01T07:00:00+00:00");
    }

    #[test]
    fn rejection_report_format() {
        let mut buf = Vec::new();
        write_rejections(&mut buf, &[Rejection { row_number: 3, reason: "item out of [1,5]".into() }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "row_number,reason\n3,\"item out of [1,5]\"\n");
    }
}
