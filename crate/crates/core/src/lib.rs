//! Gender asymmetry metrics for dialogue corpora.
//!
//! Dialogues come from screenplays ([`screenplay`]) or from timestamped
//! message streams split at long silences ([`segmentation`]). Each dialogue
//! is reduced to the genders of its two participants and whether it refers
//! to men and to women; [`metrics`] turns sets of them into Bechdel scores,
//! dialogue imbalance and gender independence, and [`analysis`] composes
//! those with [`stats`] into cohort, share and state studies.
//!
//! Numeric code is generic over [`num::Real`] (`f32`, `f64`); exact metric
//! ratios are available as any [`num::Scalar`], including [`Exact`].

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod analysis;
pub mod error;
pub mod gender;
pub mod ingest;
pub mod metrics;
pub mod num;
pub mod report;
pub mod screenplay;
pub mod segmentation;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use gender::Gender;
pub use metrics::{Dialogue, DialogueSet, Pattern};

/// Exact rational for zero-tolerance metric comparisons.
pub type Exact = num_rational::Ratio<i64>;

pub type MetricReport = metrics::MetricReport<f64>;
pub type Estimate = metrics::Estimate<f64>;
pub type BimodalFit = segmentation::BimodalFit<f64>;
pub type FitOptions = segmentation::FitOptions<f64>;
pub type StatResult = stats::StatResult<f64>;
pub type BootstrapSummary = stats::BootstrapSummary<f64>;
pub type CohortComparison = analysis::CohortComparison<f64>;
pub type CorrelationRow = analysis::CorrelationRow<f64>;
pub type ScoreGroup = analysis::ScoreGroup<f64>;
pub type ScoreDistance = analysis::ScoreDistance<f64>;
