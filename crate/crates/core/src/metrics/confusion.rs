use serde::{Deserialize, Serialize};

use super::{share, ExclusionRule};
use crate::domain::Stage;
use crate::error::{Error, Result};
use crate::store::ExportRecord;

/// Stage labels against ground truth. The first label option is the
/// positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub stage: Stage,
    pub positive_label: String,
    pub negative_label: String,
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
    pub n: u64,
    /// Shares of n in the order tp, fn, fp, tn.
    pub shares: [f64; 4],
    pub accuracy: f64,
    /// Positive asserted where the truth is negative, over all n.
    pub false_positive_rate: f64,
}

/// Confusion counts over records with ground truth. Records whose post label
/// is "Not Sure" are dropped at both stages so the populations match.
pub fn confusion_report(records: &[ExportRecord], stage: Stage) -> Result<ConfusionReport> {
    let with_truth: Vec<&ExportRecord> =
        records.iter().filter(|r| r.ground_truth.is_some()).collect();
    let first = with_truth
        .first()
        .ok_or_else(|| Error::Contract("no records carry ground truth".into()))?;
    let options = first.label_options.clone();
    let [pos, neg] = options.clone();
    let (mut tp, mut fn_, mut fp, mut tn) = (0, 0, 0, 0);
    for r in with_truth {
        if ExclusionRule::NotSurePost.excludes(r) {
            continue;
        }
        if r.label_options != options {
            return Err(Error::Contract("records mix datasets".into()));
        }
        let asserted = match stage {
            Stage::Initial => &r.initial_label,
            Stage::Post => &r.post_label,
        };
        let truth_pos = r.ground_truth.as_deref() == Some(pos.as_str());
        let said_pos = asserted.as_str() == pos;
        match (truth_pos, said_pos) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let n = tp + fn_ + fp + tn;
    Ok(ConfusionReport {
        stage,
        positive_label: pos,
        negative_label: neg,
        tp,
        fn_,
        fp,
        tn,
        n,
        shares: [share(tp, n), share(fn_, n), share(fp, n), share(tn, n)],
        accuracy: share(tp + tn, n),
        false_positive_rate: share(fp, n),
    })
}
