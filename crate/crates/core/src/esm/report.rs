use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// Number of slider items in one questionnaire.
pub const N_ITEMS: usize = 8;

/// Lowest and highest slider position.
pub const ITEM_MIN: f64 = 1.0;
pub const ITEM_MAX: f64 = 5.0;

/// The closed checklist of events a respondent can tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCategory {
    Delay,
    MissedConnection,
    HadToHurry,
    DisruptivePeople,
    Overcrowded,
    DrivingBehavior,
    InfrastructureIssues,
    MissingInformation,
    PositiveInteraction,
    TimeWellSpent,
    ArrivedOnSchedule,
    FeelingUnwell,
    Comfort,
    NiceEnvironment,
    Other,
}

impl EventCategory {
    pub const ALL: [EventCategory; 15] = [
        EventCategory::Delay,
        EventCategory::MissedConnection,
        EventCategory::HadToHurry,
        EventCategory::DisruptivePeople,
        EventCategory::Overcrowded,
        EventCategory::DrivingBehavior,
        EventCategory::InfrastructureIssues,
        EventCategory::MissingInformation,
        EventCategory::PositiveInteraction,
        EventCategory::TimeWellSpent,
        EventCategory::ArrivedOnSchedule,
        EventCategory::FeelingUnwell,
        EventCategory::Comfort,
        EventCategory::NiceEnvironment,
        EventCategory::Other,
    ];

    pub const fn as_str(&self) -> &'static str {
        match self {
            EventCategory::Delay => "delay",
            EventCategory::MissedConnection => "missed_connection",
            EventCategory::HadToHurry => "had_to_hurry",
            EventCategory::DisruptivePeople => "disruptive_people",
            EventCategory::Overcrowded => "overcrowded",
            EventCategory::DrivingBehavior => "driving_behavior",
            EventCategory::InfrastructureIssues => "infrastructure_issues",
            EventCategory::MissingInformation => "missing_information",
            EventCategory::PositiveInteraction => "positive_interaction",
            EventCategory::TimeWellSpent => "time_well_spent",
            EventCategory::ArrivedOnSchedule => "arrived_on_schedule",
            EventCategory::FeelingUnwell => "feeling_unwell",
            EventCategory::Comfort => "comfort",
            EventCategory::NiceEnvironment => "nice_environment",
            EventCategory::Other => "other",
        }
    }
}

impl fmt::Display for EventCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventCategory::ALL.iter().copied().find(|c| c.as_str() == s).ok_or_else(|| Error::UnknownEvent(s.to_string()))
    }
}

/// One geo- and time-stamped experience-sampling questionnaire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsmReport {
    pub report_id: String,
    pub participant_id: String,
    pub trip_id: String,
    pub timestamp: DateTime<Utc>,
    pub location: GeoPoint,
    pub items: [f64; N_ITEMS],
    pub events: BTreeSet<EventCategory>,
    pub free_text_category: Option<String>,
}

impl EsmReport {
    /// Checks the item bounds; location bounds are enforced by [`GeoPoint::new`].
    pub fn validate(&self) -> Result<()> {
        for (k, v) in self.items.iter().enumerate() {
            if !v.is_finite() || !(ITEM_MIN..=ITEM_MAX).contains(v) {
                return Err(Error::InvalidReport(format!("item out of [1,5] (item{} = {v})", k + 1)));
            }
        }
        GeoPoint::new(self.location.lat, self.location.lon)?;
        Ok(())
    }

    pub fn experience(&self) -> ExperienceScore {
        experience_score(self)
    }
}

/// Travel-experience construct of one report: the mean of its eight items.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ExperienceScore(pub f64);

impl ExperienceScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn experience_score(report: &EsmReport) -> ExperienceScore {
    ExperienceScore(report.items.iter().sum::<f64>() / N_ITEMS as f64)
}
