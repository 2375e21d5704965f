use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{share, ExclusionRule};
use crate::domain::flip_between;
use crate::error::{Error, Result};
use crate::ids::DatapointId;
use crate::store::ExportRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipSummary {
    pub dataset_name: String,
    pub label_options: [String; 2],
    pub total_n: u64,
    pub retained_n: u64,
    pub flips_k: u64,
    pub rate: f64,
    /// Rows: initial label (option order). Columns: post label in option
    /// order, then "Not Sure".
    pub transitions: [[u64; 3]; 2],
}

fn option_index(options: &[String; 2], label: &str) -> Option<usize> {
    options.iter().position(|o| o == label)
}

/// Annotation-level flip rate for one dataset. "Not Sure" post labels are
/// dropped from both numerator and denominator.
pub fn flip_summary(records: &[ExportRecord], dataset: &str) -> Result<FlipSummary> {
    let mut options: Option<[String; 2]> = None;
    let mut transitions = [[0u64; 3]; 2];
    let mut total = 0;
    for r in records.iter().filter(|r| r.dataset_name == dataset) {
        let opts = options.get_or_insert_with(|| r.label_options.clone());
        let integrity = |what: &str| {
            Error::Integrity(format!(
                "{}/{}: {what}",
                r.participant_id, r.datapoint_id
            ))
        };
        if *opts != r.label_options {
            return Err(integrity("label options differ within the dataset"));
        }
        let row = option_index(opts, r.initial_label.as_str())
            .ok_or_else(|| integrity("initial label is not an option"))?;
        let col = if ExclusionRule::NotSurePost.excludes(r) {
            2
        } else {
            option_index(opts, r.post_label.as_str())
                .ok_or_else(|| integrity("post label is not an option"))?
        };
        transitions[row][col] += 1;
        total += 1;
    }
    let label_options = options
        .ok_or_else(|| Error::Validation(format!("no records for dataset {dataset:?}")))?;
    let retained = total - transitions[0][2] - transitions[1][2];
    let flips = transitions[0][1] + transitions[1][0];
    Ok(FlipSummary {
        dataset_name: dataset.to_string(),
        label_options,
        total_n: total,
        retained_n: retained,
        flips_k: flips,
        rate: share(flips, retained),
        transitions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatapointFlipStat {
    pub datapoint_id: DatapointId,
    pub r: f64,
    pub n_annotations: u64,
    pub flips: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatapointFlipReport {
    pub stats: Vec<DatapointFlipStat>,
    /// Unweighted mean of `r` over datapoints.
    pub mean: f64,
    /// Datapoints with no retained annotation.
    pub skipped: Vec<DatapointId>,
}

/// Per-datapoint flip rates and their unweighted mean.
pub fn datapoint_flip_stats(records: &[ExportRecord]) -> Result<DatapointFlipReport> {
    let mut groups: BTreeMap<&DatapointId, (u64, u64)> = BTreeMap::new();
    for r in records {
        let entry = groups.entry(&r.datapoint_id).or_default();
        if let Some(flipped) = flip_between(&r.initial_label, &r.post_label) {
            entry.0 += 1;
            entry.1 += u64::from(flipped);
        }
    }
    let mut stats = Vec::new();
    let mut skipped = Vec::new();
    for (id, (n, k)) in groups {
        if n == 0 {
            warn!(datapoint = %id, "no retained annotations; left out of datapoint rates");
            skipped.push(id.clone());
            continue;
        }
        stats.push(DatapointFlipStat {
            datapoint_id: id.clone(),
            r: share(k, n),
            n_annotations: n,
            flips: k,
        });
    }
    if stats.is_empty() {
        return Err(Error::Validation("no datapoint has a retained annotation".into()));
    }
    let mean = stats.iter().map(|s| s.r).sum::<f64>() / stats.len() as f64;
    Ok(DatapointFlipReport {
        stats,
        mean,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDifference {
    /// `r_system - r_benchmark` per datapoint.
    pub differences: Vec<(DatapointId, f64)>,
    pub mean: f64,
}

/// Per-datapoint rate differences over the shared datapoint set.
pub fn paired_rate_difference(
    system: &[DatapointFlipStat],
    benchmark: &[DatapointFlipStat],
) -> Result<PairedDifference> {
    let sys: BTreeMap<&DatapointId, f64> = system.iter().map(|s| (&s.datapoint_id, s.r)).collect();
    let bench: BTreeMap<&DatapointId, f64> =
        benchmark.iter().map(|s| (&s.datapoint_id, s.r)).collect();
    let a: BTreeSet<_> = sys.keys().collect();
    let b: BTreeSet<_> = bench.keys().collect();
    let unmatched: Vec<String> = a.symmetric_difference(&b).map(|id| id.to_string()).collect();
    if !unmatched.is_empty() || sys.is_empty() {
        return Err(Error::Pairing { unmatched });
    }
    let differences: Vec<(DatapointId, f64)> = sys
        .iter()
        .map(|(id, r)| ((*id).clone(), r - bench[id]))
        .collect();
    let mean = differences.iter().map(|(_, d)| d).sum::<f64>() / differences.len() as f64;
    Ok(PairedDifference { differences, mean })
}
