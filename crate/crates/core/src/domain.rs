//! Shared domain types: datasets, annotations, transcripts, surveys.
//!
//! Everything here is a plain value with validation at construction time.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{AnnotationId, DatapointId, DatasetId, MessageId, SessionId};

/// Text of the extra re-annotation choice.
pub const NOT_SURE_LABEL: &str = "Not Sure";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: DatasetId,
    pub name: String,
    /// Annotation instructions; interpolated into the system prompt.
    pub task_context: String,
    /// The two labels, in presentation order. The first is treated as the
    /// positive class in confusion matrices.
    pub label_options: [String; 2],
    pub datapoints: Vec<DatapointId>,
}

impl Dataset {
    pub fn new(
        id: DatasetId,
        name: impl Into<String>,
        task_context: impl Into<String>,
        label_options: [String; 2],
    ) -> Result<Self> {
        let dataset = Self {
            id,
            name: name.into(),
            task_context: task_context.into(),
            label_options,
            datapoints: Vec::new(),
        };
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("dataset name is empty".into()));
        }
        let [a, b] = &self.label_options;
        if a.trim().is_empty() || b.trim().is_empty() {
            return Err(Error::Validation(format!(
                "dataset {}: label options must be non-empty",
                self.name
            )));
        }
        if a == b {
            return Err(Error::Validation(format!(
                "dataset {}: label options must be distinct",
                self.name
            )));
        }
        if self.label_options.iter().any(|o| o == NOT_SURE_LABEL) {
            return Err(Error::Validation(format!(
                "dataset {}: {NOT_SURE_LABEL:?} is reserved",
                self.name
            )));
        }
        Ok(())
    }

    pub fn has_option(&self, label: &str) -> bool {
        self.label_options.iter().any(|o| o == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Datapoint {
    pub id: DatapointId,
    pub dataset_id: DatasetId,
    pub text: String,
    /// Item-specific context, e.g. the relation being tested.
    #[serde(default)]
    pub item_context: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<String>,
}

impl Datapoint {
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::Validation(format!("datapoint {}: text is empty", self.id)));
        }
        if self.dataset_id != dataset.id {
            return Err(Error::Validation(format!(
                "datapoint {} belongs to {}, not {}",
                self.id, self.dataset_id, dataset.id
            )));
        }
        if let Some(truth) = &self.ground_truth {
            if !dataset.has_option(truth) {
                return Err(Error::Validation(format!(
                    "datapoint {}: ground truth {truth:?} is not an option of {}",
                    self.id, dataset.name
                )));
            }
        }
        Ok(())
    }
}

/// Self-reported confidence. Encoded NotSure = 1, SomewhatSure = 2,
/// VerySure = 3, so a confidence change lies in -2..=2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceLevel {
    NotSure = 1,
    SomewhatSure = 2,
    VerySure = 3,
}

impl ConfidenceLevel {
    pub const ALL: [ConfidenceLevel; 3] = [
        ConfidenceLevel::NotSure,
        ConfidenceLevel::SomewhatSure,
        ConfidenceLevel::VerySure,
    ];

    pub fn ordinal(self) -> i8 {
        self as i8
    }

    pub fn from_ordinal(value: i8) -> Option<Self> {
        match value {
            1 => Some(Self::NotSure),
            2 => Some(Self::SomewhatSure),
            3 => Some(Self::VerySure),
            _ => None,
        }
    }

    /// Lower-case phrase used inside prompts ("very sure").
    pub fn phrase(self) -> &'static str {
        match self {
            Self::NotSure => "not sure",
            Self::SomewhatSure => "somewhat sure",
            Self::VerySure => "very sure",
        }
    }

    /// Answer text shown to annotators ("Very Sure").
    pub fn display_label(self) -> &'static str {
        match self {
            Self::NotSure => "Not Sure",
            Self::SomewhatSure => "Somewhat Sure",
            Self::VerySure => "Very Sure",
        }
    }

    /// Accepts the snake_case key, the display text or the prompt phrase.
    pub fn parse(text: &str) -> Option<Self> {
        let norm = text.trim().to_ascii_lowercase().replace(['_', '-'], " ");
        Self::ALL.into_iter().find(|c| c.phrase() == norm)
    }
}

impl fmt::Display for ConfidenceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Initial,
    Post,
}

/// A label asserted by an annotator: one of the dataset's options, or the
/// post-deliberation "Not Sure" choice. Serialized as plain text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Option(String),
    NotSure,
}

impl Label {
    pub fn parse(text: &str) -> Self {
        if text == NOT_SURE_LABEL {
            Label::NotSure
        } else {
            Label::Option(text.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Label::Option(s) => s,
            Label::NotSure => NOT_SURE_LABEL,
        }
    }

    pub fn is_not_sure(&self) -> bool {
        matches!(self, Label::NotSure)
    }

    pub fn option(&self) -> Option<&str> {
        match self {
            Label::Option(s) => Some(s),
            Label::NotSure => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Label::parse(&s))
    }
}

/// True iff `label` may be submitted at `stage` for `dataset`.
pub fn validate_label(dataset: &Dataset, label: &str, stage: Stage) -> bool {
    dataset.has_option(label) || (label == NOT_SURE_LABEL && stage == Stage::Post)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementExpectation {
    MostAgree,
    HalfAgree,
    MostDisagree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialAnswers {
    pub discussion_would_help: bool,
    pub agreement_expectation: AgreementExpectation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostAnswers {
    pub discussion_helped: bool,
    pub doubted: bool,
    pub changed_self_report: bool,
    #[serde(default)]
    pub process_feeling: String,
    #[serde(default)]
    pub outcome_feeling: String,
}

/// Stage-specific questionnaire answers; the variant fixes the stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageAnswers {
    Initial(InitialAnswers),
    Post(PostAnswers),
}

impl StageAnswers {
    pub fn stage(&self) -> Stage {
        match self {
            StageAnswers::Initial(_) => Stage::Initial,
            StageAnswers::Post(_) => Stage::Post,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: AnnotationId,
    pub session_id: SessionId,
    pub datapoint_id: DatapointId,
    pub label: Label,
    pub confidence: ConfidenceLevel,
    pub answers: StageAnswers,
    pub created_at: Timestamp,
}

impl AnnotationRecord {
    pub fn stage(&self) -> Stage {
        self.answers.stage()
    }

    /// Checks the label against the dataset and the stage rules.
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if !validate_label(dataset, self.label.as_str(), self.stage()) {
            return Err(Error::Validation(format!(
                "label {:?} is not allowed at the {:?} stage of {}",
                self.label.as_str(),
                self.stage(),
                dataset.name
            )));
        }
        Ok(())
    }
}

/// Whether the post-deliberation label differs from the initial one.
///
/// `None` when the post label is "Not Sure": those annotations are left out
/// of flip analysis entirely.
pub fn is_flip(initial: &AnnotationRecord, post: &AnnotationRecord) -> Result<Option<bool>> {
    if initial.session_id != post.session_id || initial.datapoint_id != post.datapoint_id {
        return Err(Error::Contract(format!(
            "records refer to different items ({}/{} vs {}/{})",
            initial.session_id, initial.datapoint_id, post.session_id, post.datapoint_id
        )));
    }
    if initial.stage() != Stage::Initial || post.stage() != Stage::Post {
        return Err(Error::Contract("expected an initial and a post record".into()));
    }
    Ok(flip_between(&initial.label, &post.label))
}

/// Label-level flip rule shared by every metric.
pub fn flip_between(initial: &Label, post: &Label) -> Option<bool> {
    if post.is_not_sure() {
        None
    } else {
        Some(initial != post)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Socratic,
    Annotator,
}

/// One message in a Socratic transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub id: MessageId,
    pub session_id: SessionId,
    pub datapoint_id: DatapointId,
    pub seq: u32,
    pub role: Role,
    pub text: String,
    pub created_at: Timestamp,
    #[serde(default)]
    pub violations: Vec<crate::dialogue::GuardrailViolation>,
    /// Client-supplied id for idempotent retries (annotator messages only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_message_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Importance {
    VeryImportant,
    SomewhatImportant,
    NotReallyImportant,
    NotImportantAtAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorHelpfulness {
    VeryHelpful,
    SomewhatHelpful,
    NotVeryHelpful,
    MadeTaskHarder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VersusHuman {
    MoreHelpful,
    SomewhatMoreHelpful,
    LessHelpful,
    NotNearlyAsHelpful,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WouldUse {
    Yes,
    No,
    NotSure,
}

/// The five task-load items, each scored 1..=21.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TlxScores {
    pub mental: u8,
    pub temporal: u8,
    pub performance: u8,
    pub effort: u8,
    pub frustration: u8,
}

impl TlxScores {
    pub const NAMES: [&'static str; 5] = ["mental", "temporal", "performance", "effort", "frustration"];

    pub fn values(&self) -> [u8; 5] {
        [
            self.mental,
            self.temporal,
            self.performance,
            self.effort,
            self.frustration,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in Self::NAMES.iter().zip(self.values()) {
            if !(1..=21).contains(&value) {
                return Err(Error::Validation(format!(
                    "TLX item {name} = {value} is outside 1..=21"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub session_id: SessionId,
    pub tlx: TlxScores,
    pub q1_importance: Importance,
    #[serde(default)]
    pub q2_opinions: String,
    pub q3_prior_deliberation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q4_prior_helpfulness: Option<PriorHelpfulness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q5_vs_human: Option<VersusHuman>,
    pub q6_would_use: WouldUse,
    #[serde(default)]
    pub q7_why: String,
    #[serde(default)]
    pub q8_feedback: String,
}

impl SurveyResponse {
    /// Range checks plus the q3 -> q4/q5 branching rule.
    pub fn validate(&self) -> Result<()> {
        self.tlx.validate()?;
        let follow_ups = self.q4_prior_helpfulness.is_some() || self.q5_vs_human.is_some();
        if !self.q3_prior_deliberation && follow_ups {
            return Err(Error::Validation(
                "q4/q5 are only asked when q3 is answered Yes".into(),
            ));
        }
        if self.q3_prior_deliberation
            && (self.q4_prior_helpfulness.is_none() || self.q5_vs_human.is_none())
        {
            return Err(Error::Validation("q4 and q5 are required when q3 is Yes".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisqualificationReason {
    FailedBothAttentionChecks,
    Misconduct,
    ExternalLlmSuspected,
    ImplausibleSpeed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum ParticipantStatus {
    Active,
    Completed,
    Disqualified(DisqualificationReason),
}

impl ParticipantStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, ParticipantStatus::Active)
    }
}
