//! Pure functions from export records to the study's quantitative results.
//!
//! Shares are fractions in [0, 1]; [`pct`] renders them the way the report
//! tables do (two decimals).

mod confidence;
mod confusion;
mod engagement;
mod flips;
mod report;
mod tlx;

use serde::{Deserialize, Serialize};

use crate::store::ExportRecord;

pub use confidence::{confidence_changes, confidence_transitions, ConfidenceTransition};
pub use confusion::{confusion_report, ConfusionReport};
pub use engagement::{engagement_stats, EngagementStats};
pub use flips::{
    datapoint_flip_stats, flip_summary, paired_rate_difference, DatapointFlipReport,
    DatapointFlipStat, FlipSummary, PairedDifference,
};
pub use report::{
    build_report, render_text, sankey_confidence_csv, sankey_flip_csv, Comparison,
    ComparisonReport, DatasetReport, PopulationReport,
};
pub use tlx::{tlx_aggregate, TlxAggregate};

/// Which annotations a metric leaves out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionRule {
    /// Keep everything.
    #[default]
    None,
    /// Drop annotations whose post label is "Not Sure" (or an imported
    /// equivalent such as "Irresolvable").
    NotSurePost,
}

impl ExclusionRule {
    pub fn excludes(self, record: &ExportRecord) -> bool {
        match self {
            ExclusionRule::None => false,
            ExclusionRule::NotSurePost => record.post_label.is_not_sure(),
        }
    }
}

/// Percentage with two decimals, e.g. `0.061538` -> `"6.15"`.
pub fn pct(share: f64) -> String {
    format!("{:.2}", share * 100.0)
}

pub(crate) fn share(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}
