use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::Store;
use crate::clock::Timestamp;
use crate::domain::{
    AgreementExpectation, ConfidenceLevel, Label, ParticipantStatus, Role, Stage, StageAnswers, NOT_SURE_LABEL,
};
use crate::error::{Error, Result};
use crate::ids::{DatapointId, ParticipantId};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordSource {
    Study,
    Benchmark,
}

/// One (participant, datapoint) row with both annotation stages.
///
/// Field order is the serialized order; do not reorder without bumping
/// [`SCHEMA_VERSION`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRecord {
    pub schema_version: u32,
    pub source: RecordSource,
    pub participant_id: ParticipantId,
    pub dataset_name: String,
    pub label_options: [String; 2],
    pub datapoint_id: DatapointId,
    pub ground_truth: Option<String>,
    pub initial_label: Label,
    pub initial_confidence: ConfidenceLevel,
    /// "Not Sure" for the study; benchmark "Irresolvable" maps here too.
    pub post_label: Label,
    pub post_confidence: ConfidenceLevel,
    pub discussion_would_help: Option<bool>,
    pub agreement_expectation: Option<AgreementExpectation>,
    pub discussion_helped: Option<bool>,
    pub doubted: Option<bool>,
    pub changed_self_report: Option<bool>,
    pub deliberated: bool,
    pub annotator_message_count: u32,
    /// Characters per annotator message, in order.
    pub annotator_char_counts: Vec<u32>,
    /// Characters per Socratic reply, in order, opener excluded.
    pub socratic_char_counts: Vec<u32>,
    pub initial_at: Option<Timestamp>,
    pub post_at: Option<Timestamp>,
}

impl ExportRecord {
    pub fn validate(&self) -> Result<()> {
        let here = || format!("{}/{}", self.participant_id, self.datapoint_id);
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "{}: schema_version {} (expected {SCHEMA_VERSION})",
                here(),
                self.schema_version
            )));
        }
        let has = |l: &str| self.label_options.iter().any(|o| o == l);
        if self.label_options[0] == self.label_options[1]
            || self.label_options.iter().any(|o| o.is_empty() || o == NOT_SURE_LABEL)
        {
            return Err(Error::Schema(format!("{}: bad label_options", here())));
        }
        if self.initial_label.is_not_sure() || !has(self.initial_label.as_str()) {
            return Err(Error::Schema(format!(
                "{}: initial_label {:?} is not an option",
                here(),
                self.initial_label.as_str()
            )));
        }
        if !self.post_label.is_not_sure() && !has(self.post_label.as_str()) {
            return Err(Error::Schema(format!(
                "{}: post_label {:?} is not an option",
                here(),
                self.post_label.as_str()
            )));
        }
        if let Some(truth) = &self.ground_truth {
            if !has(truth) {
                return Err(Error::Schema(format!(
                    "{}: ground_truth {truth:?} is not an option",
                    here()
                )));
            }
        }
        if self.annotator_char_counts.len() != self.annotator_message_count as usize {
            return Err(Error::Schema(format!(
                "{}: {} annotator lengths for {} messages",
                here(),
                self.annotator_char_counts.len(),
                self.annotator_message_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportFilter {
    #[serde(default = "yes")]
    pub completed_only: bool,
    #[serde(default)]
    pub dataset: Option<String>,
}

fn yes() -> bool {
    true
}

impl Default for ExportFilter {
    fn default() -> Self {
        Self {
            completed_only: true,
            dataset: None,
        }
    }
}

pub(crate) fn sort_records(records: &mut [ExportRecord]) {
    records.sort_by(|a, b| {
        (&a.participant_id, &a.dataset_name, &a.datapoint_id).cmp(&(
            &b.participant_id,
            &b.dataset_name,
            &b.datapoint_id,
        ))
    });
}

fn chars(text: &str) -> u32 {
    text.chars().count() as u32
}

impl Store {
    /// Study records in (participant, dataset, datapoint) order.
    /// Disqualified or flagged participants are never exported.
    pub fn export_study(&self, filter: &ExportFilter) -> Result<Vec<ExportRecord>> {
        let mut out = Vec::new();
        for session in self.sessions() {
            let excluded = session.exclusion.is_some()
                || matches!(session.status, ParticipantStatus::Disqualified(_));
            if excluded || (filter.completed_only && !session.is_analyzable()) {
                continue;
            }
            for assignment in &session.assignments {
                let dataset = self.dataset(&assignment.dataset_id)?;
                if filter.dataset.as_ref().is_some_and(|d| *d != dataset.name) {
                    continue;
                }
                let dp = &assignment.datapoint_id;
                let (Some(initial), Some(post)) = (
                    self.annotation(&session.id, dp, Stage::Initial),
                    self.annotation(&session.id, dp, Stage::Post),
                ) else {
                    continue;
                };
                let transcript = self.transcript(&session.id, dp);
                let annotator: Vec<u32> = transcript
                    .iter()
                    .filter(|m| m.role == Role::Annotator)
                    .map(|m| chars(&m.text))
                    .collect();
                let socratic: Vec<u32> = transcript
                    .iter()
                    .filter(|m| m.role == Role::Socratic && m.seq > 0)
                    .map(|m| chars(&m.text))
                    .collect();
                let (would_help, expectation) = match &initial.answers {
                    StageAnswers::Initial(a) => (a.discussion_would_help, a.agreement_expectation),
                    StageAnswers::Post(_) => {
                        return Err(Error::Integrity(format!("{}: stage mismatch", initial.id)))
                    }
                };
                let StageAnswers::Post(post_answers) = &post.answers else {
                    return Err(Error::Integrity(format!("{}: stage mismatch", post.id)));
                };
                out.push(ExportRecord {
                    schema_version: SCHEMA_VERSION,
                    source: RecordSource::Study,
                    participant_id: session.participant_id.clone(),
                    dataset_name: dataset.name.clone(),
                    label_options: dataset.label_options.clone(),
                    datapoint_id: dp.clone(),
                    ground_truth: self.datapoint(dp)?.ground_truth,
                    initial_label: initial.label.clone(),
                    initial_confidence: initial.confidence,
                    post_label: post.label.clone(),
                    post_confidence: post.confidence,
                    discussion_would_help: Some(would_help),
                    agreement_expectation: Some(expectation),
                    discussion_helped: Some(post_answers.discussion_helped),
                    doubted: Some(post_answers.doubted),
                    changed_self_report: Some(post_answers.changed_self_report),
                    deliberated: !annotator.is_empty(),
                    annotator_message_count: annotator.len() as u32,
                    annotator_char_counts: annotator,
                    socratic_char_counts: socratic,
                    initial_at: Some(initial.created_at),
                    post_at: Some(post.created_at),
                });
            }
        }
        let tables = self.tables.lock();
        out.extend(
            tables
                .imported_study
                .iter()
                .filter(|r| filter.dataset.as_ref().is_none_or(|d| *d == r.dataset_name))
                .cloned(),
        );
        drop(tables);
        sort_records(&mut out);
        Ok(out)
    }
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[ExportRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Parses and validates a JSONL export. Errors name the offending line.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<ExportRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExportRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Schema(format!("line {}: {e}", i + 1)))?;
        record
            .validate()
            .map_err(|e| Error::Schema(format!("line {}: {e}", i + 1)))?;
        out.push(record);
    }
    Ok(out)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema_version: u32,
    source: RecordSource,
    participant_id: &'a str,
    dataset_name: &'a str,
    label_options: String,
    datapoint_id: &'a str,
    ground_truth: Option<&'a str>,
    initial_label: &'a str,
    initial_confidence: i8,
    post_label: &'a str,
    post_confidence: i8,
    discussion_would_help: Option<bool>,
    agreement_expectation: Option<AgreementExpectation>,
    discussion_helped: Option<bool>,
    doubted: Option<bool>,
    changed_self_report: Option<bool>,
    deliberated: bool,
    annotator_message_count: u32,
    annotator_char_counts: String,
    socratic_char_counts: String,
    initial_at: Option<String>,
    post_at: Option<String>,
}

fn join(xs: &[u32]) -> String {
    xs.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

/// Spreadsheet projection: lists are `;`-joined, options `|`-joined and
/// confidence is the 1..3 ordinal.
pub fn records_to_csv<W: Write>(out: W, records: &[ExportRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer
            .serialize(CsvRow {
                schema_version: r.schema_version,
                source: r.source,
                participant_id: r.participant_id.as_str(),
                dataset_name: &r.dataset_name,
                label_options: r.label_options.join("|"),
                datapoint_id: r.datapoint_id.as_str(),
                ground_truth: r.ground_truth.as_deref(),
                initial_label: r.initial_label.as_str(),
                initial_confidence: r.initial_confidence.ordinal(),
                post_label: r.post_label.as_str(),
                post_confidence: r.post_confidence.ordinal(),
                discussion_would_help: r.discussion_would_help,
                agreement_expectation: r.agreement_expectation,
                discussion_helped: r.discussion_helped,
                doubted: r.doubted,
                changed_self_report: r.changed_self_report,
                deliberated: r.deliberated,
                annotator_message_count: r.annotator_message_count,
                annotator_char_counts: join(&r.annotator_char_counts),
                socratic_char_counts: join(&r.socratic_char_counts),
                initial_at: r.initial_at.map(|t| t.to_rfc3339()),
                post_at: r.post_at.map(|t| t.to_rfc3339()),
            })
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}
