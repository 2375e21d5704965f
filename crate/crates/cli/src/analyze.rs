//! Reading exports and writing comparison reports.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use socratic_core::domain::{SurveyResponse, TlxScores};
use socratic_core::metrics::{
    build_report, render_text, sankey_confidence_csv, sankey_flip_csv, ComparisonReport,
};
use socratic_core::store::{read_jsonl, ExportRecord};

use crate::error::{create_dir, read_to_string, write, CliError, Result};

/// Every field of an export record, in serialized order.
pub const EXPORT_FIELDS: [&str; 22] = [
    "schema_version",
    "source",
    "participant_id",
    "dataset_name",
    "label_options",
    "datapoint_id",
    "ground_truth",
    "initial_label",
    "initial_confidence",
    "post_label",
    "post_confidence",
    "discussion_would_help",
    "agreement_expectation",
    "discussion_helped",
    "doubted",
    "changed_self_report",
    "deliberated",
    "annotator_message_count",
    "annotator_char_counts",
    "socratic_char_counts",
    "initial_at",
    "post_at",
];

/// Parses a JSONL export. Lines whose keys differ from the record schema
/// are reported with every missing and unexpected field.
pub fn read_records(path: &Path) -> Result<Vec<ExportRecord>> {
    let text = read_to_string(path)?;
    let expected: BTreeSet<&str> = EXPORT_FIELDS.iter().copied().collect();
    let mut problems = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Ok(Value::Object(map)) = serde_json::from_str::<Value>(line) else {
            problems.push(format!("line {}: not a JSON object", i + 1));
            continue;
        };
        let present: BTreeSet<&str> = map.keys().map(String::as_str).collect();
        let missing: Vec<&str> = expected.difference(&present).copied().collect();
        let unknown: Vec<&str> = present.difference(&expected).copied().collect();
        if !missing.is_empty() || !unknown.is_empty() {
            let mut p = format!("line {}:", i + 1);
            if !missing.is_empty() {
                p.push_str(&format!(" missing fields {}", missing.join(", ")));
            }
            if !missing.is_empty() && !unknown.is_empty() {
                p.push(';');
            }
            if !unknown.is_empty() {
                p.push_str(&format!(" unexpected fields {}", unknown.join(", ")));
            }
            problems.push(p);
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: schema mismatch\n  {}",
            path.display(),
            problems.join("\n  ")
        )));
    }
    read_jsonl(text.as_bytes())
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn read_surveys(path: &Path) -> Result<Vec<TlxScores>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let s: SurveyResponse = serde_json::from_str(line)
            .map_err(|e| CliError::Validation(format!("{} line {}: {e}", path.display(), i + 1)))?;
        s.validate()
            .map_err(|e| CliError::Validation(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(s.tlx);
    }
    Ok(out)
}

/// Builds the report and writes `report.json`, `report.txt` and two Sankey
/// edge lists per dataset into `out`. Returns the written file names.
pub fn analyze(
    study: &[ExportRecord],
    benchmark: Option<&[ExportRecord]>,
    surveys: &[TlxScores],
    out: &Path,
) -> Result<(ComparisonReport, Vec<String>)> {
    if study.is_empty() {
        return Err(CliError::Validation("study export has no records".into()));
    }
    let report = build_report(study, benchmark, surveys)?;
    create_dir(out)?;
    let mut files = Vec::new();
    let mut put = |name: String, contents: &[u8]| -> Result<()> {
        write(&out.join(&name), contents)?;
        files.push(name);
        Ok(())
    };
    put("report.json".into(), &to_pretty(&report)?)?;
    put("report.txt".into(), render_text(&report).as_bytes())?;
    for d in &report.datasets {
        let slug = slug(&d.dataset_name);
        put(format!("sankey_flips_{slug}.csv"), sankey_flip_csv(&d.study.flips).as_bytes())?;
        put(
            format!("sankey_confidence_{slug}.csv"),
            sankey_confidence_csv(&d.study.confidence).as_bytes(),
        )?;
    }
    Ok((report, files))
}

fn to_pretty(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}
