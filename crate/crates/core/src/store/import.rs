use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::export::{ExportRecord, RecordSource, SCHEMA_VERSION};
use crate::domain::{ConfidenceLevel, Label, NOT_SURE_LABEL};
use crate::error::{Error, Result};

/// Source column for each record field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMap {
    pub participant_id: String,
    pub datapoint_id: String,
    pub initial_label: String,
    pub post_label: String,
    pub initial_confidence: String,
    pub post_confidence: String,
    #[serde(default)]
    pub ground_truth: Option<String>,
}

/// Declarative description of an external annotation log.
///
/// ```toml
/// dataset_name = "Sarcasm"
/// label_options = ["Sarcastic", "Not Sarcastic"]
///
/// [columns]
/// participant_id = "worker"
/// datapoint_id = "item"
/// initial_label = "label_pre"
/// post_label = "label_post"
/// initial_confidence = "conf_pre"
/// post_confidence = "conf_post"
///
/// [labels]
/// "sarcastic" = "Sarcastic"
/// "not_sarcastic" = "Not Sarcastic"
/// "Irresolvable" = "Not Sure"
///
/// [confidence]
/// "3" = "very_sure"
/// ```
///
/// Raw values equal to an option are accepted without a `labels` entry.
/// Confidence values not listed are parsed as names ("Very Sure") or the
/// 1..3 ordinal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkMapping {
    pub dataset_name: String,
    pub label_options: [String; 2],
    pub columns: ColumnMap,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default)]
    pub confidence: BTreeMap<String, ConfidenceLevel>,
}

impl BenchmarkMapping {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mapping: Self =
            toml::from_str(text).map_err(|e| Error::Schema(format!("mapping manifest: {e}")))?;
        mapping.validate()?;
        Ok(mapping)
    }

    fn validate(&self) -> Result<()> {
        if self.label_options[0] == self.label_options[1] {
            return Err(Error::Schema("label options must differ".into()));
        }
        for (raw, target) in &self.labels {
            if target != NOT_SURE_LABEL && !self.label_options.contains(target) {
                return Err(Error::Schema(format!(
                    "label {raw:?} maps to {target:?}, which is not an option"
                )));
            }
        }
        Ok(())
    }

    fn label(&self, row: usize, raw: &str) -> Result<Label> {
        let raw = raw.trim();
        let target = self
            .labels
            .get(raw)
            .map(String::as_str)
            .or_else(|| self.label_options.iter().find(|o| *o == raw).map(String::as_str))
            .ok_or_else(|| Error::Mapping {
                row,
                value: raw.to_string(),
            })?;
        Ok(Label::parse(target))
    }

    fn confidence(&self, row: usize, raw: &str) -> Result<ConfidenceLevel> {
        let raw = raw.trim();
        self.confidence
            .get(raw)
            .copied()
            .or_else(|| ConfidenceLevel::parse(raw))
            .or_else(|| raw.parse().ok().and_then(ConfidenceLevel::from_ordinal))
            .ok_or_else(|| Error::Mapping {
                row,
                value: raw.to_string(),
            })
    }
}

/// Reads a benchmark CSV into normalized records. `row` in errors is the
/// 1-based data row (the header is row 0).
pub fn import_benchmark_csv<R: Read>(input: R, mapping: &BenchmarkMapping) -> Result<Vec<ExportRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("header: {e}")))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let c = &mapping.columns;
    let participant = col(&c.participant_id)?;
    let datapoint = col(&c.datapoint_id)?;
    let initial_label = col(&c.initial_label)?;
    let post_label = col(&c.post_label)?;
    let initial_conf = col(&c.initial_confidence)?;
    let post_conf = col(&c.post_confidence)?;
    let truth = c.ground_truth.as_deref().map(col).transpose()?;

    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Schema(format!("row {row_no}: {e}")))?;
        let field = |idx: usize| row.get(idx).unwrap_or("").trim();
        let initial = mapping.label(row_no, field(initial_label))?;
        if initial.is_not_sure() {
            return Err(Error::Mapping {
                row: row_no,
                value: field(initial_label).to_string(),
            });
        }
        let ground_truth = match truth.map(field).filter(|t| !t.is_empty()) {
            None => None,
            Some(raw) => match mapping.label(row_no, raw)? {
                Label::Option(o) => Some(o),
                Label::NotSure => None,
            },
        };
        let record = ExportRecord {
            schema_version: SCHEMA_VERSION,
            source: RecordSource::Benchmark,
            participant_id: field(participant).into(),
            dataset_name: mapping.dataset_name.clone(),
            label_options: mapping.label_options.clone(),
            datapoint_id: field(datapoint).into(),
            ground_truth,
            initial_label: initial,
            initial_confidence: mapping.confidence(row_no, field(initial_conf))?,
            post_label: mapping.label(row_no, field(post_label))?,
            post_confidence: mapping.confidence(row_no, field(post_conf))?,
            discussion_would_help: None,
            agreement_expectation: None,
            discussion_helped: None,
            doubted: None,
            changed_self_report: None,
            deliberated: true,
            annotator_message_count: 0,
            annotator_char_counts: Vec::new(),
            socratic_char_counts: Vec::new(),
            initial_at: None,
            post_at: None,
        };
        if record.participant_id.as_str().is_empty() || record.datapoint_id.as_str().is_empty() {
            return Err(Error::Schema(format!("row {row_no}: empty participant or datapoint id")));
        }
        out.push(record);
    }
    Ok(out)
}
