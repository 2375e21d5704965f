//! The per-participant workflow: two initial annotations with embedded
//! attention checks, a confirmation step, one Socratic discussion and
//! re-annotation per item with a break between them, then the survey.
//!
//! `Session` is a plain state machine. It validates every request against
//! the current phase and hands back the records to persist; storage and
//! locking live in [`crate::service`].

use std::collections::HashMap;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::domain::{
    validate_label, AnnotationRecord, ConfidenceLevel, Dataset, DisqualificationReason,
    InitialAnswers, Label, ParticipantStatus, PostAnswers, Stage, StageAnswers, SurveyResponse,
};
use crate::error::{Error, Result};
use crate::ids::{AnnotationId, DatapointId, DatasetId, ParticipantId, SessionId};
use crate::questions::attention_check;

/// Annotator messages required before re-annotation unlocks.
pub const MIN_ANNOTATOR_MESSAGES: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "phase", content = "item", rename_all = "snake_case")]
pub enum SessionPhase {
    Annotate(u8),
    Confirm,
    Discuss(u8),
    Reannotate(u8),
    Break,
    Survey,
    Done,
}

impl SessionPhase {
    /// The only legal next phase; the graph is a single forward path.
    pub fn successor(self) -> Option<SessionPhase> {
        use SessionPhase::*;
        Some(match self {
            Annotate(1) => Annotate(2),
            Annotate(_) => Confirm,
            Confirm => Discuss(1),
            Discuss(k) => Reannotate(k),
            Reannotate(1) => Break,
            Reannotate(_) => Survey,
            Break => Discuss(2),
            Survey => Done,
            Done => return None,
        })
    }

    pub fn item(self) -> Option<u8> {
        match self {
            SessionPhase::Annotate(k) | SessionPhase::Discuss(k) | SessionPhase::Reannotate(k) => {
                Some(k)
            }
            _ => None,
        }
    }

    /// Every phase in order, starting at `Annotate(1)`.
    pub fn path() -> Vec<SessionPhase> {
        std::iter::successors(Some(SessionPhase::Annotate(1)), |p| p.successor()).collect()
    }
}

impl fmt::Display for SessionPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionPhase::Annotate(k) => write!(f, "annotate({k})"),
            SessionPhase::Confirm => f.write_str("confirm"),
            SessionPhase::Discuss(k) => write!(f, "discuss({k})"),
            SessionPhase::Reannotate(k) => write!(f, "reannotate({k})"),
            SessionPhase::Break => f.write_str("break"),
            SessionPhase::Survey => f.write_str("survey"),
            SessionPhase::Done => f.write_str("done"),
        }
    }
}

/// Unlocks re-annotation once the annotator has sent enough messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueGate {
    pub datapoint_id: DatapointId,
    pub annotator_message_count: u32,
    pub unlocked: bool,
}

impl DialogueGate {
    pub fn new(datapoint_id: DatapointId) -> Self {
        Self {
            datapoint_id,
            annotator_message_count: 0,
            unlocked: false,
        }
    }

    pub fn record_message(&mut self) {
        self.annotator_message_count += 1;
        // never relocks
        self.unlocked |= self.annotator_message_count >= MIN_ANNOTATOR_MESSAGES;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub dataset_id: DatasetId,
    pub datapoint_id: DatapointId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionAnswer {
    pub option: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseChange {
    pub from: SessionPhase,
    pub to: SessionPhase,
    pub at: Timestamp,
}

/// Answers submitted with a pre-deliberation annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialInput {
    pub label: String,
    pub confidence: ConfidenceLevel,
    #[serde(flatten)]
    pub answers: InitialAnswers,
}

/// Answers submitted with a post-deliberation annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostInput {
    pub label: String,
    pub confidence: ConfidenceLevel,
    #[serde(flatten)]
    pub answers: PostAnswers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionOutcome {
    pub correct: bool,
    pub disqualified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: SessionId,
    pub participant_id: ParticipantId,
    /// Presentation order: item 1 then item 2, one per dataset.
    pub assignments: [Assignment; 2],
    pub phase: SessionPhase,
    pub status: ParticipantStatus,
    /// Set by a manual review flag; excludes the participant from analysis
    /// even when the session completed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<DisqualificationReason>,
    pub attention: [Option<AttentionAnswer>; 2],
    pub gates: [DialogueGate; 2],
    pub initial_submitted: [bool; 2],
    pub post_submitted: [bool; 2],
    /// Initial annotations can no longer change.
    pub initial_locked: bool,
    pub started_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<Timestamp>,
    pub phase_log: Vec<PhaseChange>,
}

impl Session {
    pub fn new(
        id: SessionId,
        participant_id: ParticipantId,
        assignments: [Assignment; 2],
        now: Timestamp,
    ) -> Self {
        let gates = [
            DialogueGate::new(assignments[0].datapoint_id.clone()),
            DialogueGate::new(assignments[1].datapoint_id.clone()),
        ];
        Self {
            id,
            participant_id,
            assignments,
            phase: SessionPhase::Annotate(1),
            status: ParticipantStatus::Active,
            exclusion: None,
            attention: [None, None],
            gates,
            initial_submitted: [false; 2],
            post_submitted: [false; 2],
            initial_locked: false,
            started_at: now,
            finished_at: None,
            phase_log: Vec::new(),
        }
    }

    /// 1-based item index of `datapoint_id` in this session.
    pub fn item_of(&self, datapoint_id: &DatapointId) -> Result<u8> {
        self.assignments
            .iter()
            .position(|a| &a.datapoint_id == datapoint_id)
            .map(|i| i as u8 + 1)
            .ok_or_else(|| {
                Error::NotFound(format!(
                    "datapoint {datapoint_id} is not assigned to session {}",
                    self.id
                ))
            })
    }

    pub fn assignment(&self, item: u8) -> &Assignment {
        &self.assignments[usize::from(item - 1)]
    }

    pub fn gate(&self, item: u8) -> &DialogueGate {
        &self.gates[usize::from(item - 1)]
    }

    /// Included in analysis exports.
    pub fn is_analyzable(&self) -> bool {
        self.status == ParticipantStatus::Completed && self.exclusion.is_none()
    }

    fn ensure_active(&self) -> Result<()> {
        match self.status {
            ParticipantStatus::Active => Ok(()),
            ParticipantStatus::Completed => Err(Error::wrong_phase(
                self.phase,
                "session is already complete",
            )),
            ParticipantStatus::Disqualified(reason) => Err(Error::Conflict(format!(
                "participant was disqualified ({reason:?})"
            ))),
        }
    }

    fn advance(&mut self, now: Timestamp) {
        let to = self
            .phase
            .successor()
            .expect("advance is never called from Done");
        self.phase_log.push(PhaseChange {
            from: self.phase,
            to,
            at: now,
        });
        self.phase = to;
    }

    pub fn submit_initial(
        &mut self,
        dataset: &Dataset,
        datapoint_id: &DatapointId,
        input: InitialInput,
        annotation_id: AnnotationId,
        now: Timestamp,
    ) -> Result<AnnotationRecord> {
        self.ensure_active()?;
        let item = self.item_of(datapoint_id)?;
        if self.initial_submitted[usize::from(item - 1)] {
            return Err(Error::Conflict(format!(
                "initial annotation for {datapoint_id} already submitted"
            )));
        }
        if self.phase != SessionPhase::Annotate(item) {
            return Err(Error::wrong_phase(
                self.phase,
                format!("cannot annotate item {item} now"),
            ));
        }
        self.check_dataset(dataset, item)?;
        if !validate_label(dataset, &input.label, Stage::Initial) {
            return Err(Error::Validation(format!(
                "{:?} is not a label option of {}",
                input.label, dataset.name
            )));
        }
        let record = AnnotationRecord {
            id: annotation_id,
            session_id: self.id.clone(),
            datapoint_id: datapoint_id.clone(),
            label: Label::parse(&input.label),
            confidence: input.confidence,
            answers: StageAnswers::Initial(input.answers),
            created_at: now,
        };
        self.initial_submitted[usize::from(item - 1)] = true;
        self.advance(now);
        Ok(record)
    }

    pub fn record_attention_check(
        &mut self,
        index: u8,
        chosen_option: &str,
        now: Timestamp,
    ) -> Result<AttentionOutcome> {
        self.ensure_active()?;
        let check = attention_check(index)
            .ok_or_else(|| Error::Validation(format!("no attention check {index}")))?;
        let slot = usize::from(index - 1);
        if self.attention[slot].is_some() {
            return Err(Error::Conflict(format!("attention check {index} already answered")));
        }
        let reachable = match self.phase {
            SessionPhase::Annotate(k) => k >= index,
            SessionPhase::Confirm => true,
            _ => false,
        };
        if !reachable {
            return Err(Error::wrong_phase(
                self.phase,
                format!("attention check {index} is not being shown"),
            ));
        }
        if !check.options.contains(&chosen_option) {
            return Err(Error::Validation(format!(
                "{chosen_option:?} is not an option of attention check {index}"
            )));
        }
        let correct = chosen_option == check.correct_option;
        self.attention[slot] = Some(AttentionAnswer {
            option: chosen_option.to_string(),
            correct,
        });
        let both_failed = self
            .attention
            .iter()
            .all(|a| matches!(a, Some(AttentionAnswer { correct: false, .. })));
        if both_failed {
            self.status =
                ParticipantStatus::Disqualified(DisqualificationReason::FailedBothAttentionChecks);
            self.exclusion = Some(DisqualificationReason::FailedBothAttentionChecks);
            self.finished_at = Some(now);
        }
        Ok(AttentionOutcome {
            correct,
            disqualified: both_failed,
        })
    }

    pub fn confirm_proceed(&mut self, now: Timestamp) -> Result<()> {
        self.ensure_active()?;
        if self.phase != SessionPhase::Confirm {
            return Err(Error::wrong_phase(self.phase, "both items must be annotated first"));
        }
        if self.attention.iter().any(Option::is_none) {
            return Err(Error::wrong_phase(
                self.phase,
                "both attention checks must be answered first",
            ));
        }
        self.initial_locked = true;
        self.advance(now);
        Ok(())
    }

    /// Checks that the annotator may chat about `datapoint_id` right now.
    /// Chat stays open after the gate unlocks.
    pub fn ensure_can_chat(&self, datapoint_id: &DatapointId) -> Result<u8> {
        self.ensure_active()?;
        let item = self.item_of(datapoint_id)?;
        match self.phase {
            SessionPhase::Discuss(k) | SessionPhase::Reannotate(k) if k == item => Ok(item),
            _ => Err(Error::wrong_phase(
                self.phase,
                format!("item {item} is not under discussion"),
            )),
        }
    }

    /// Counts one delivered annotator message and opens re-annotation when
    /// the gate unlocks.
    pub fn record_annotator_message(
        &mut self,
        datapoint_id: &DatapointId,
        now: Timestamp,
    ) -> Result<DialogueGate> {
        let item = self.ensure_can_chat(datapoint_id)?;
        let gate = &mut self.gates[usize::from(item - 1)];
        gate.record_message();
        let gate = gate.clone();
        if gate.unlocked && self.phase == SessionPhase::Discuss(item) {
            self.advance(now);
        }
        Ok(gate)
    }

    pub fn submit_reannotation(
        &mut self,
        dataset: &Dataset,
        datapoint_id: &DatapointId,
        input: PostInput,
        annotation_id: AnnotationId,
        now: Timestamp,
    ) -> Result<AnnotationRecord> {
        self.ensure_active()?;
        let item = self.item_of(datapoint_id)?;
        if self.post_submitted[usize::from(item - 1)] {
            return Err(Error::Conflict(format!(
                "re-annotation for {datapoint_id} already submitted"
            )));
        }
        let gate = self.gate(item);
        if self.phase == SessionPhase::Discuss(item) || (self.phase == SessionPhase::Reannotate(item) && !gate.unlocked) {
            return Err(Error::GateLocked {
                count: gate.annotator_message_count,
            });
        }
        if self.phase != SessionPhase::Reannotate(item) {
            return Err(Error::wrong_phase(
                self.phase,
                format!("cannot re-annotate item {item} now"),
            ));
        }
        self.check_dataset(dataset, item)?;
        if !validate_label(dataset, &input.label, Stage::Post) {
            return Err(Error::Validation(format!(
                "{:?} is not a re-annotation option of {}",
                input.label, dataset.name
            )));
        }
        let record = AnnotationRecord {
            id: annotation_id,
            session_id: self.id.clone(),
            datapoint_id: datapoint_id.clone(),
            label: Label::parse(&input.label),
            confidence: input.confidence,
            answers: StageAnswers::Post(input.answers),
            created_at: now,
        };
        self.post_submitted[usize::from(item - 1)] = true;
        self.advance(now);
        Ok(record)
    }

    /// The break has no server-side timer; the client acknowledges it.
    pub fn acknowledge_break(&mut self, now: Timestamp) -> Result<()> {
        self.ensure_active()?;
        if self.phase != SessionPhase::Break {
            return Err(Error::wrong_phase(self.phase, "no break in progress"));
        }
        self.advance(now);
        Ok(())
    }

    pub fn submit_survey(&mut self, response: &SurveyResponse, now: Timestamp) -> Result<()> {
        self.ensure_active()?;
        if self.phase != SessionPhase::Survey {
            return Err(Error::wrong_phase(self.phase, "survey is not open"));
        }
        if response.session_id != self.id {
            return Err(Error::Contract("survey belongs to another session".into()));
        }
        response.validate()?;
        self.advance(now);
        self.status = ParticipantStatus::Completed;
        self.finished_at = Some(now);
        Ok(())
    }

    /// Applies a manual (or automatic) disqualification flag.
    ///
    /// Active participants become Disqualified. Terminal statuses are kept
    /// as they are, but the flag still removes the participant from
    /// analysis.
    pub fn flag_disqualification(
        &mut self,
        reason: DisqualificationReason,
        now: Timestamp,
    ) -> ParticipantStatus {
        if self.exclusion.is_none() {
            self.exclusion = Some(reason);
        }
        if self.status == ParticipantStatus::Active {
            self.status = ParticipantStatus::Disqualified(reason);
            self.finished_at = Some(now);
        }
        self.status
    }

    fn check_dataset(&self, dataset: &Dataset, item: u8) -> Result<()> {
        if self.assignment(item).dataset_id != dataset.id {
            return Err(Error::Contract(format!(
                "item {item} belongs to dataset {}, not {}",
                self.assignment(item).dataset_id,
                dataset.id
            )));
        }
        Ok(())
    }
}

/// Picks one datapoint per dataset, uniformly among the least-covered
/// datapoints of each, and randomizes which dataset comes first.
pub fn assign_datapoints<R: Rng + ?Sized>(
    coverage: &HashMap<DatapointId, u32>,
    datasets: [&Dataset; 2],
    rng: &mut R,
) -> Result<[Assignment; 2]> {
    let mut picks = Vec::with_capacity(2);
    for dataset in datasets {
        let least = dataset
            .datapoints
            .iter()
            .map(|d| coverage.get(d).copied().unwrap_or(0))
            .min()
            .ok_or_else(|| {
                Error::Configuration(format!("dataset {} has no datapoints", dataset.name))
            })?;
        let candidates: Vec<&DatapointId> = dataset
            .datapoints
            .iter()
            .filter(|d| coverage.get(*d).copied().unwrap_or(0) == least)
            .collect();
        let chosen = candidates
            .choose(rng)
            .expect("the minimum is attained by at least one datapoint");
        picks.push(Assignment {
            dataset_id: dataset.id.clone(),
            datapoint_id: (*chosen).clone(),
        });
    }
    if rng.random_bool(0.5) {
        picks.swap(0, 1);
    }
    let second = picks.pop().expect("two picks");
    let first = picks.pop().expect("two picks");
    Ok([first, second])
}

/// [`assign_datapoints`] with a fresh RNG seeded from `seed`.
pub fn assign_datapoints_seeded(
    coverage: &HashMap<DatapointId, u32>,
    datasets: [&Dataset; 2],
    seed: u64,
) -> Result<[Assignment; 2]> {
    assign_datapoints(coverage, datasets, &mut ChaCha8Rng::seed_from_u64(seed))
}
