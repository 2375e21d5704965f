use serde::{Deserialize, Serialize};
use socratic_stats::Summary;

use crate::store::ExportRecord;

/// Message counts and lengths over deliberated items. The Socratic opener
/// is not counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementStats {
    pub transcripts: usize,
    /// Annotator plus Socratic messages per transcript.
    pub message_counts: Vec<u32>,
    pub messages: Summary,
    pub annotator_messages: Summary,
    /// `None` when no message of that role exists.
    pub annotator_chars: Option<Summary>,
    pub socratic_chars: Option<Summary>,
}

fn floats(xs: impl Iterator<Item = u32>) -> Vec<f64> {
    xs.map(f64::from).collect()
}

/// `None` when no record was deliberated.
pub fn engagement_stats(records: &[ExportRecord]) -> Option<EngagementStats> {
    let deliberated: Vec<&ExportRecord> = records.iter().filter(|r| r.deliberated).collect();
    if deliberated.is_empty() {
        return None;
    }
    let message_counts: Vec<u32> = deliberated
        .iter()
        .map(|r| (r.annotator_char_counts.len() + r.socratic_char_counts.len()) as u32)
        .collect();
    let annotator_chars =
        floats(deliberated.iter().flat_map(|r| r.annotator_char_counts.iter().copied()));
    let socratic_chars =
        floats(deliberated.iter().flat_map(|r| r.socratic_char_counts.iter().copied()));
    Some(EngagementStats {
        transcripts: deliberated.len(),
        messages: Summary::of(&floats(message_counts.iter().copied()))?,
        annotator_messages: Summary::of(&floats(
            deliberated.iter().map(|r| r.annotator_message_count),
        ))?,
        annotator_chars: Summary::of(&annotator_chars),
        socratic_chars: Summary::of(&socratic_chars),
        message_counts,
    })
}
