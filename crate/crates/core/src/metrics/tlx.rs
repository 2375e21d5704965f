use serde::{Deserialize, Serialize};
use socratic_stats::Summary;

use crate::domain::TlxScores;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlxAggregate {
    pub n: usize,
    /// (item name, summary) in mental, temporal, performance, effort,
    /// frustration order.
    pub items: Vec<(String, Summary)>,
}

pub fn tlx_aggregate(responses: &[TlxScores]) -> Result<TlxAggregate> {
    if responses.is_empty() {
        return Err(Error::Validation("no survey responses".into()));
    }
    for r in responses {
        r.validate()?;
    }
    let items = TlxScores::NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let xs: Vec<f64> = responses.iter().map(|r| f64::from(r.values()[i])).collect();
            (name.to_string(), Summary::of(&xs).expect("non-empty"))
        })
        .collect();
    Ok(TlxAggregate {
        n: responses.len(),
        items,
    })
}
