//! What a participant's client may see right now.
//!
//! Views are phase-scoped: nothing from a later phase appears early. In
//! particular the re-annotation questions are absent until the dialogue
//! gate unlocks.

use serde::{Deserialize, Serialize};

use crate::domain::{ChatMessage, Datapoint, Dataset, Label, ParticipantStatus};
use crate::ids::{DatapointId, ParticipantId, SessionId};
use crate::questions::{
    annotation_questions, attention_check, reannotation_questions, survey_questions, Question,
};
use crate::session::{DialogueGate, Session, SessionPhase};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatapointView {
    pub datapoint_id: DatapointId,
    pub dataset_name: String,
    pub task_context: String,
    pub item_context: String,
    pub text: String,
    pub label_options: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionCheckView {
    pub index: u8,
    pub question: Question,
}

/// The participant's own initial answer, shown on the confirm screen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialSummary {
    pub datapoint_id: DatapointId,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: SessionId,
    pub participant_id: ParticipantId,
    pub phase: SessionPhase,
    pub status: ParticipantStatus,
    /// 1-based item currently in focus.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item: Option<u8>,
    pub total_items: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub datapoint: Option<DatapointView>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub questions: Vec<Question>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attention_checks: Vec<AttentionCheckView>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial_answers: Vec<InitialSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<ChatMessage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<DialogueGate>,
}

/// Inputs a view is built from; gathered by the service from the store.
pub struct ViewParts<'a> {
    pub session: &'a Session,
    pub dataset: Option<&'a Dataset>,
    pub datapoint: Option<&'a Datapoint>,
    pub transcript: Vec<ChatMessage>,
    pub initial_answers: Vec<InitialSummary>,
}

impl SessionView {
    pub fn build(parts: ViewParts<'_>) -> Self {
        let session = parts.session;
        let mut view = SessionView {
            session_id: session.id.clone(),
            participant_id: session.participant_id.clone(),
            phase: session.phase,
            status: session.status,
            item: None,
            total_items: 2,
            datapoint: None,
            questions: Vec::new(),
            attention_checks: Vec::new(),
            initial_answers: Vec::new(),
            transcript: Vec::new(),
            gate: None,
        };
        if session.status != ParticipantStatus::Active {
            return view;
        }
        view.item = session.phase.item();
        if let (Some(dataset), Some(dp)) = (parts.dataset, parts.datapoint) {
            view.datapoint = Some(DatapointView {
                datapoint_id: dp.id.clone(),
                dataset_name: dataset.name.clone(),
                task_context: dataset.task_context.clone(),
                item_context: dp.item_context.clone(),
                text: dp.text.clone(),
                label_options: dataset.label_options.clone(),
            });
        }
        let pending_checks = |upto: u8| {
            (1..=upto)
                .filter(|&i| session.attention[usize::from(i - 1)].is_none())
                .filter_map(attention_check)
                .map(|c| AttentionCheckView {
                    index: c.index,
                    question: c.question(),
                })
                .collect::<Vec<_>>()
        };
        match session.phase {
            SessionPhase::Annotate(k) => {
                if let Some(dataset) = parts.dataset {
                    view.questions = annotation_questions(dataset);
                }
                view.attention_checks = pending_checks(k);
            }
            SessionPhase::Confirm => {
                view.attention_checks = pending_checks(2);
                view.initial_answers = parts.initial_answers;
            }
            SessionPhase::Discuss(k) | SessionPhase::Reannotate(k) => {
                let gate = session.gate(k).clone();
                if gate.unlocked {
                    if let Some(dataset) = parts.dataset {
                        view.questions = reannotation_questions(dataset);
                    }
                }
                view.gate = Some(gate);
                view.transcript = parts.transcript;
            }
            SessionPhase::Survey => view.questions = survey_questions(),
            SessionPhase::Break | SessionPhase::Done => {}
        }
        view
    }
}
