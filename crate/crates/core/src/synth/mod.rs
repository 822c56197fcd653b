//! Synthetic ESM datasets with planted hot and cold regions, and Monte-Carlo
//! calibration runs over them.
//!
//! Background reports are uniform over a square centred on the scenario
//! origin; cluster reports are Gaussian around their centre with SD equal to
//! half the cluster radius. Each report draws a latent experience level
//! `mean + shift + N(0, noise_sd)` and its eight items scatter around that
//! latent with SD `item_noise_sd`, clipped to the slider range.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_points, prepare, AnalysisConfig};
use crate::error::{Error, Result};
use crate::esm::{EsmReport, EventCategory, ITEM_MAX, ITEM_MIN, N_ITEMS};
use crate::geo::{GeoPoint, PlanarPoint, Projection};
use crate::spots::group_spots;
use crate::stats::Confidence;

/// Default scenario origin (central Hamburg).
pub const DEFAULT_ORIGIN: GeoPoint = GeoPoint { lat: 53.55, lon: 9.99 };

/// Seconds between consecutive synthetic timestamps.
const REPORT_INTERVAL_S: i64 = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCluster {
    /// Centre in meters relative to the scenario origin.
    pub center: PlanarPoint,
    /// Gaussian SD is `radius / 2`.
    pub radius: f64,
    pub n_points: usize,
    pub experience_shift: f64,
    /// Per-category flag probability inside the cluster; absent means 0.
    #[serde(default)]
    pub event_rates: BTreeMap<EventCategory, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub seed: u64,
    /// Side of the square study area in meters.
    pub extent: f64,
    pub n_background: usize,
    #[serde(default)]
    pub clusters: Vec<PlantedCluster>,
    pub background_experience_mean: f64,
    /// SD of the report-level latent experience.
    pub noise_sd: f64,
    /// SD of each item around the report's latent.
    pub item_noise_sd: f64,
    #[serde(default)]
    pub background_event_rates: BTreeMap<EventCategory, f64>,
    pub n_participants: usize,
    pub origin: GeoPoint,
}

impl SyntheticScenario {
    /// No planted structure: uniform locations and i.i.d. normal scores.
    pub fn null(n_points: usize, seed: u64) -> Self {
        Self {
            seed,
            extent: 10_000.0,
            n_background: n_points,
            clusters: Vec::new(),
            background_experience_mean: 3.0,
            noise_sd: 0.5,
            item_noise_sd: 0.0,
            background_event_rates: BTreeMap::new(),
            n_participants: 50,
            origin: DEFAULT_ORIGIN,
        }
    }

    /// Two clusters (hot and cold, shift ±1.5, radius 500 m, 300 reports
    /// each) on 2,000 background reports spread over a 40 km square.
    pub fn standard(seed: u64) -> Self {
        let rates = |pairs: &[(EventCategory, f64)]| pairs.iter().copied().collect::<BTreeMap<_, _>>();
        Self {
            seed,
            extent: 40_000.0,
            n_background: 2_000,
            clusters: vec![
                PlantedCluster {
                    center: PlanarPoint::new(-6_000.0, 0.0),
                    radius: 500.0,
                    n_points: 300,
                    experience_shift: 1.5,
                    event_rates: rates(&[
                        (EventCategory::Comfort, 0.6),
                        (EventCategory::NiceEnvironment, 0.25),
                        (EventCategory::TimeWellSpent, 0.3),
                    ]),
                },
                PlantedCluster {
                    center: PlanarPoint::new(6_000.0, 0.0),
                    radius: 500.0,
                    n_points: 300,
                    experience_shift: -1.5,
                    event_rates: rates(&[
                        (EventCategory::Overcrowded, 0.4),
                        (EventCategory::DisruptivePeople, 0.35),
                        (EventCategory::Delay, 0.2),
                    ]),
                },
            ],
            background_experience_mean: 3.0,
            noise_sd: 0.6,
            item_noise_sd: 0.3,
            background_event_rates: rates(&[
                (EventCategory::Delay, 0.1),
                (EventCategory::Overcrowded, 0.1),
                (EventCategory::Comfort, 0.15),
            ]),
            n_participants: 120,
            origin: DEFAULT_ORIGIN,
        }
    }

    /// The standard clusters with a common `radius`, in a denser 10 km
    /// square with centres 5 km apart. Used to check that the selected band
    /// tracks the planted scale.
    pub fn radius_ladder(radius: f64, seed: u64) -> Self {
        let mut s = Self::standard(seed);
        s.extent = 10_000.0;
        for (c, x) in s.clusters.iter_mut().zip([-2_500.0, 2_500.0]) {
            c.center = PlanarPoint::new(x, 0.0);
            c.radius = radius;
        }
        s
    }

    pub fn n_points(&self) -> usize {
        self.n_background + self.clusters.iter().map(|c| c.n_points).sum::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return bad(format!("extent must be > 0, got {}", self.extent));
        }
        if self.n_points() == 0 {
            return bad("scenario generates no reports".into());
        }
        if self.n_participants == 0 {
            return bad("n_participants must be >= 1".into());
        }
        if !(ITEM_MIN..=ITEM_MAX).contains(&self.background_experience_mean) {
            return bad(format!("background_experience_mean {} outside [1, 5]", self.background_experience_mean));
        }
        for (name, sd) in [("noise_sd", self.noise_sd), ("item_noise_sd", self.item_noise_sd)] {
            if !(sd.is_finite() && sd >= 0.0) {
                return bad(format!("{name} must be >= 0, got {sd}"));
            }
        }
        GeoPoint::new(self.origin.lat, self.origin.lon).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        check_rates(&self.background_event_rates)?;
        for (k, c) in self.clusters.iter().enumerate() {
            if !(c.radius.is_finite() && c.radius > 0.0) {
                return bad(format!("cluster {k}: radius must be > 0, got {}", c.radius));
            }
            if !(c.center.x.is_finite() && c.center.y.is_finite() && c.experience_shift.is_finite()) {
                return bad(format!("cluster {k}: non-finite centre or shift"));
            }
            check_rates(&c.event_rates)?;
        }
        Ok(())
    }
}

fn check_rates(rates: &BTreeMap<EventCategory, f64>) -> Result<()> {
    match rates.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
        Some((c, p)) => Err(Error::InvalidConfig(format!("rate for {c} = {p} outside [0, 1]"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub reports: Vec<EsmReport>,
    /// Generator coordinates relative to the scenario origin.
    pub planar: Vec<PlanarPoint>,
    /// Planted cluster index per report; `None` for background.
    pub truth: Vec<Option<usize>>,
}

/// Draws a dataset; identical scenarios give identical output.
pub fn generate(scenario: &SyntheticScenario) -> Result<SyntheticDataset> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let projection = Projection::new(scenario.origin);
    let start: DateTime<Utc> = Utc.with_ymd_and_hms(2025, 3, 1, 6, 0, 0).single().expect("valid date");
    let half = scenario.extent / 2.0;

    let n = scenario.n_points();
    let mut planar = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for _ in 0..scenario.n_background {
        planar.push(PlanarPoint::new(rng.random_range(-half..half), rng.random_range(-half..half)));
        truth.push(None);
    }
    for (k, c) in scenario.clusters.iter().enumerate() {
        let sd = c.radius / 2.0;
        for _ in 0..c.n_points {
            let dx = sd * std_normal.sample(&mut rng);
            let dy = sd * std_normal.sample(&mut rng);
            planar.push(PlanarPoint::new(c.center.x + dx, c.center.y + dy));
            truth.push(Some(k));
        }
    }

    let reports = planar
        .iter()
        .zip(&truth)
        .enumerate()
        .map(|(i, (p, t))| {
            let (shift, rates) = match t {
                Some(k) => (scenario.clusters[*k].experience_shift, &scenario.clusters[*k].event_rates),
                None => (0.0, &scenario.background_event_rates),
            };
            let latent = scenario.background_experience_mean + shift + scenario.noise_sd * std_normal.sample(&mut rng);
            let mut items = [0.0; N_ITEMS];
            for item in items.iter_mut() {
                *item = (latent + scenario.item_noise_sd * std_normal.sample(&mut rng)).clamp(ITEM_MIN, ITEM_MAX);
            }
            let events = EventCategory::ALL
                .iter()
                .filter(|c| {
                    let rate = rates.get(c).copied().unwrap_or(0.0);
                    rng.random::<f64>() < rate
                })
                .copied()
                .collect();
            let participant = i % scenario.n_participants;
            let nth_for_participant = i / scenario.n_participants;
            EsmReport {
                report_id: format!("r{i:06}"),
                participant_id: format!("p{participant:04}"),
                // a trip spans twelve consecutive reports of one participant
                trip_id: format!("p{participant:04}-t{:04}", nth_for_participant / 12),
                timestamp: start + Duration::seconds(i as i64 * REPORT_INTERVAL_S),
                location: projection.inverse(p),
                items,
                events,
                free_text_category: None,
            }
        })
        .collect();
    Ok(SyntheticDataset { reports, planar, truth })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub n_replicates: usize,
    /// Replicate `i` uses scenario seed `seed + i`.
    pub seed: u64,
    pub analysis: AnalysisConfig,
    pub min_conf: Confidence,
    pub min_size: usize,
}

impl CalibrationConfig {
    pub fn new(n_replicates: usize, seed: u64) -> Self {
        Self {
            n_replicates,
            seed,
            analysis: AnalysisConfig::default(),
            min_conf: Confidence::P90,
            min_size: crate::spots::DEFAULT_MIN_SIZE,
        }
    }
}

/// Outcome of one replicate. Metrics are `None` when the replicate failed
/// or when they are undefined (recovery without clusters, FP rate without
/// background).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub seed: u64,
    pub n_points: usize,
    pub status: String,
    pub chosen_band: Option<f64>,
    /// Fraction of points with |z| > 1.96 before FDR correction.
    pub pre_fdr_rate: Option<f64>,
    /// Fraction of points significant after FDR at the minimum confidence.
    pub post_fdr_fraction: Option<f64>,
    /// Fraction of planted points binned with their cluster's sign.
    pub recovery_fraction: Option<f64>,
    /// Fraction of background points with a nonzero bin.
    pub background_fp_rate: Option<f64>,
    pub n_spots: Option<usize>,
    /// Whether each planted cluster is matched by exactly one spot of the
    /// right polarity (and there are no other spots).
    pub spots_match_truth: Option<bool>,
}

impl ReplicateRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSummary {
    pub n_ok: usize,
    pub n_failed: usize,
    pub mean_pre_fdr_rate: Option<f64>,
    pub mean_post_fdr_fraction: Option<f64>,
    pub mean_recovery_fraction: Option<f64>,
    pub mean_background_fp_rate: Option<f64>,
    pub mean_n_spots: Option<f64>,
    /// Share of successful replicates whose spots match the planted clusters.
    pub spot_match_rate: Option<f64>,
    pub band_min: Option<f64>,
    pub band_median: Option<f64>,
    pub band_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub rows: Vec<ReplicateRow>,
    pub summary: CalibrationSummary,
}

/// Runs `n_replicates` independent replicates of `scenario` in parallel.
pub fn run_calibration(scenario: &SyntheticScenario, config: &CalibrationConfig) -> Result<Calibration> {
    if config.n_replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be >= 1".into()));
    }
    if config.min_size < 1 {
        return Err(Error::InvalidConfig("min_size must be >= 1".into()));
    }
    scenario.validate()?;
    let rows: Vec<ReplicateRow> =
        (0..config.n_replicates).into_par_iter().map(|i| run_replicate(scenario, config, i)).collect::<Result<_>>()?;
    let summary = summarize(&rows);
    Ok(Calibration { rows, summary })
}

fn run_replicate(scenario: &SyntheticScenario, config: &CalibrationConfig, replicate: usize) -> Result<ReplicateRow> {
    let seed = config.seed.wrapping_add(replicate as u64);
    let scenario = SyntheticScenario { seed, ..scenario.clone() };
    let data = generate(&scenario)?;
    let mut row = ReplicateRow {
        replicate,
        seed,
        n_points: data.reports.len(),
        status: "ok".into(),
        chosen_band: None,
        pre_fdr_rate: None,
        post_fdr_fraction: None,
        recovery_fraction: None,
        background_fp_rate: None,
        n_spots: None,
        spots_match_truth: None,
    };
    match evaluate(&data, &scenario, config) {
        Ok(m) => {
            row.chosen_band = Some(m.band);
            row.pre_fdr_rate = Some(m.pre_fdr_rate);
            row.post_fdr_fraction = Some(m.post_fdr_fraction);
            row.recovery_fraction = m.recovery_fraction;
            row.background_fp_rate = m.background_fp_rate;
            row.n_spots = Some(m.n_spots);
            row.spots_match_truth = m.spots_match_truth;
        }
        // Configuration problems abort the run; data-dependent failures are recorded.
        Err(e @ Error::InvalidConfig(_)) => return Err(e),
        Err(e) => row.status = format!("failed: {e}"),
    }
    Ok(row)
}

/// Recovery metrics for one analyzed synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryMetrics {
    pub band: f64,
    pub pre_fdr_rate: f64,
    pub post_fdr_fraction: f64,
    pub recovery_fraction: Option<f64>,
    pub background_fp_rate: Option<f64>,
    pub n_spots: usize,
    pub spots_match_truth: Option<bool>,
}

/// Analyzes `data` and scores the result against the planted truth.
pub fn evaluate(
    data: &SyntheticDataset,
    scenario: &SyntheticScenario,
    config: &CalibrationConfig,
) -> Result<RecoveryMetrics> {
    let prepared = prepare(&data.reports)?;
    let analysis = analyze_points(&prepared.planar, &prepared.values, &config.analysis)?;
    let n = data.reports.len() as f64;
    let min_bin = config.min_conf.min_bin();
    let z_crit = 1.959_963_984_540_054;
    let pre = analysis.results.iter().filter(|r| r.z.abs() > z_crit).count() as f64 / n;
    let significant = |b: i8| b.abs() >= min_bin;
    let post = analysis.results.iter().filter(|r| significant(r.bin)).count() as f64 / n;

    let mut planted = 0usize;
    let mut recovered = 0usize;
    let mut background = 0usize;
    let mut false_pos = 0usize;
    for (r, t) in analysis.results.iter().zip(&data.truth) {
        match t {
            Some(k) => {
                planted += 1;
                let sign = scenario.clusters[*k].experience_shift.signum() as i8;
                if significant(r.bin) && r.bin.signum() == sign {
                    recovered += 1;
                }
            }
            None => {
                background += 1;
                if significant(r.bin) {
                    false_pos += 1;
                }
            }
        }
    }

    let spots = group_spots(
        &analysis.results,
        &analysis.graph,
        &data.reports,
        &prepared.planar,
        config.min_conf,
        config.min_size,
    )?;
    let spots_match_truth = (!scenario.clusters.is_empty()).then(|| spots_match(&spots, &data.truth, scenario));

    Ok(RecoveryMetrics {
        band: analysis.band,
        pre_fdr_rate: pre,
        post_fdr_fraction: post,
        recovery_fraction: (planted > 0).then(|| recovered as f64 / planted as f64),
        background_fp_rate: (background > 0).then(|| false_pos as f64 / background as f64),
        n_spots: spots.len(),
        spots_match_truth,
    })
}

/// True when there is exactly one spot per planted cluster, each spot's
/// members are mostly from one distinct cluster, and polarities agree.
fn spots_match(spots: &[crate::spots::Spot], truth: &[Option<usize>], scenario: &SyntheticScenario) -> bool {
    if spots.len() != scenario.clusters.len() {
        return false;
    }
    let mut seen = vec![false; scenario.clusters.len()];
    for s in spots {
        let mut counts = vec![0usize; scenario.clusters.len()];
        for &i in &s.member_ids {
            if let Some(k) = truth[i] {
                counts[k] += 1;
            }
        }
        let Some((k, &best)) = counts.iter().enumerate().max_by_key(|(_, c)| **c) else {
            return false;
        };
        let expected = if scenario.clusters[k].experience_shift > 0.0 {
            crate::spots::Polarity::Hot
        } else {
            crate::spots::Polarity::Cold
        };
        if 2 * best <= s.n_reports || seen[k] || s.polarity != expected {
            return false;
        }
        seen[k] = true;
    }
    true
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(rows: &[ReplicateRow]) -> CalibrationSummary {
    let ok: Vec<&ReplicateRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let mut bands: Vec<f64> = ok.iter().filter_map(|r| r.chosen_band).collect();
    bands.sort_by(f64::total_cmp);
    let median = if bands.is_empty() {
        None
    } else if bands.len() % 2 == 1 {
        Some(bands[bands.len() / 2])
    } else {
        Some((bands[bands.len() / 2 - 1] + bands[bands.len() / 2]) / 2.0)
    };
    CalibrationSummary {
        n_ok: ok.len(),
        n_failed: rows.len() - ok.len(),
        mean_pre_fdr_rate: mean(ok.iter().filter_map(|r| r.pre_fdr_rate)),
        mean_post_fdr_fraction: mean(ok.iter().filter_map(|r| r.post_fdr_fraction)),
        mean_recovery_fraction: mean(ok.iter().filter_map(|r| r.recovery_fraction)),
        mean_background_fp_rate: mean(ok.iter().filter_map(|r| r.background_fp_rate)),
        mean_n_spots: mean(ok.iter().filter_map(|r| r.n_spots.map(|s| s as f64))),
        spot_match_rate: mean(ok.iter().filter_map(|r| r.spots_match_truth.map(|m| if m { 1.0 } else { 0.0 }))),
        band_min: bands.first().copied(),
        band_median: median,
        band_max: bands.last().copied(),
    }
}

pub const CALIBRATION_HEADER: [&str; 11] = [
    "replicate",
    "seed",
    "n_points",
    "status",
    "chosen_band",
    "pre_fdr_rate",
    "post_fdr_fraction",
    "recovery_fraction",
    "background_fp_rate",
    "n_spots",
    "spots_match_truth",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl Calibration {
    /// One row per replicate followed by a `summary` row of means over the
    /// successful replicates (band column holds the median band).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CALIBRATION_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.replicate.to_string(),
                r.seed.to_string(),
                r.n_points.to_string(),
                r.status.clone(),
                cell(r.chosen_band),
                cell(r.pre_fdr_rate),
                cell(r.post_fdr_fraction),
                cell(r.recovery_fraction),
                cell(r.background_fp_rate),
                cell(r.n_spots),
                cell(r.spots_match_truth),
            ])?;
        }
        let s = &self.summary;
        let mean_points = mean(self.rows.iter().map(|r| r.n_points as f64));
        w.write_record([
            "summary".to_string(),
            String::new(),
            cell(mean_points),
            format!("ok={} failed={}", s.n_ok, s.n_failed),
            cell(s.band_median),
            cell(s.mean_pre_fdr_rate),
            cell(s.mean_post_fdr_fraction),
            cell(s.mean_recovery_fraction),
            cell(s.mean_background_fp_rate),
            cell(s.mean_n_spots),
            cell(s.spot_match_rate),
        ])?;
        w.flush()?;
        Ok(())
    }
}
