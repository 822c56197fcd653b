//! Experience-sampling reports: ingestion, the travel-experience construct,
//! locational outliers and rater agreement.

mod csv_io;
mod kappa;
mod outliers;
mod report;

pub use csv_io::{parse_reports, write_rejections, write_reports, ParsedReports, Rejection, HEADER};
pub use kappa::{fleiss_kappa, FleissKappa, RatingTable};
pub use outliers::{locational_outliers, outliers_from_nn, OUTLIER_SD_MULTIPLIER};
pub use report::{experience_score, EsmReport, EventCategory, ExperienceScore, ITEM_MAX, ITEM_MIN, N_ITEMS};
