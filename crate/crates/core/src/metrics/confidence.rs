use serde::{Deserialize, Serialize};

use super::{share, ExclusionRule};
use crate::domain::ConfidenceLevel;
use crate::store::ExportRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceTransition {
    pub rule: ExclusionRule,
    /// `counts[pre][post]`, indices in NotSure, SomewhatSure, VerySure
    /// order.
    pub counts: [[u64; 3]; 3],
    pub total: u64,
    pub high_share_pre: f64,
    pub high_share_post: f64,
}

impl ConfidenceTransition {
    pub fn share(&self, pre: ConfidenceLevel, post: ConfidenceLevel) -> f64 {
        share(self.counts[idx(pre)][idx(post)], self.total)
    }
}

fn idx(c: ConfidenceLevel) -> usize {
    (c.ordinal() - 1) as usize
}

pub fn confidence_transitions(records: &[ExportRecord], rule: ExclusionRule) -> ConfidenceTransition {
    let mut counts = [[0u64; 3]; 3];
    for r in records.iter().filter(|r| !rule.excludes(r)) {
        counts[idx(r.initial_confidence)][idx(r.post_confidence)] += 1;
    }
    let total: u64 = counts.iter().flatten().sum();
    let high = idx(ConfidenceLevel::VerySure);
    let pre_high: u64 = counts[high].iter().sum();
    let post_high: u64 = counts.iter().map(|row| row[high]).sum();
    ConfidenceTransition {
        rule,
        counts,
        total,
        high_share_pre: share(pre_high, total),
        high_share_post: share(post_high, total),
    }
}

/// `post - pre` on the 1..3 ordinal scale; positive means more confident.
pub fn confidence_changes(records: &[ExportRecord]) -> Vec<f64> {
    records
        .iter()
        .map(|r| f64::from(r.post_confidence.ordinal() - r.initial_confidence.ordinal()))
        .collect()
}
