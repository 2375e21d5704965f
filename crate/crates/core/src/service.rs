//! Orchestrates the store, the session engine, the dialogue loop and the
//! chat provider. Requests for one session are serialized by a per-session
//! async mutex; different sessions never wait on each other.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, SystemClock};
use crate::dialogue::{
    assemble_system_prompt, next_turn, opener_message, DialogueTranscript, PromptContext,
    TurnConfig, TurnIds,
};
use crate::domain::{
    ChatMessage, DisqualificationReason, ParticipantStatus, Stage, SurveyResponse,
};
use crate::error::{Error, Result};
use crate::ids::{DatapointId, IdGenerator, ParticipantId, SessionId};
use crate::provider::ChatProvider;
use crate::session::{
    assign_datapoints, AttentionOutcome, DialogueGate, InitialInput, PostInput, Session,
};
use crate::store::{Store, StoreEvent};
use crate::view::{InitialSummary, SessionView, ViewParts};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatReply {
    pub annotator: ChatMessage,
    pub socratic: ChatMessage,
    pub gate: DialogueGate,
    /// True when this answers a retry of an already completed turn.
    pub replayed: bool,
}

pub struct StudyService {
    store: Arc<Store>,
    provider: Arc<dyn ChatProvider>,
    clock: Arc<dyn Clock>,
    ids: Arc<IdGenerator>,
    turn: TurnConfig,
    assignment_rng: Mutex<ChaCha20Rng>,
    locks: Mutex<HashMap<SessionId, Arc<tokio::sync::Mutex<()>>>>,
}

pub struct ServiceBuilder {
    store: Arc<Store>,
    provider: Arc<dyn ChatProvider>,
    clock: Arc<dyn Clock>,
    ids: Arc<IdGenerator>,
    turn: TurnConfig,
    seed: Option<u64>,
}

impl ServiceBuilder {
    pub fn clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn ids(mut self, ids: Arc<IdGenerator>) -> Self {
        self.ids = ids;
        self
    }

    pub fn turn_config(mut self, turn: TurnConfig) -> Self {
        self.turn = turn;
        self
    }

    /// Seeds datapoint assignment; unseeded services draw from the OS.
    pub fn assignment_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn build(self) -> StudyService {
        let rng = match self.seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::from_os_rng(),
        };
        StudyService {
            store: self.store,
            provider: self.provider,
            clock: self.clock,
            ids: self.ids,
            turn: self.turn,
            assignment_rng: Mutex::new(rng),
            locks: Mutex::new(HashMap::new()),
        }
    }
}

impl StudyService {
    pub fn builder(store: Arc<Store>, provider: Arc<dyn ChatProvider>) -> ServiceBuilder {
        ServiceBuilder {
            store,
            provider,
            clock: Arc::new(SystemClock),
            ids: Arc::new(IdGenerator::from_entropy()),
            turn: TurnConfig::default(),
            seed: None,
        }
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    fn lock_for(&self, id: &SessionId) -> Arc<tokio::sync::Mutex<()>> {
        self.locks.lock().entry(id.clone()).or_default().clone()
    }

    /// Creates the participant's only session with one datapoint from each
    /// dataset, least-covered first.
    pub fn start_session(&self, participant: ParticipantId) -> Result<SessionView> {
        if participant.as_str().trim().is_empty() {
            return Err(Error::Validation("participant id is empty".into()));
        }
        let session = self.store.create_session(&participant, |coverage, datasets| {
            let [a, b] = datasets else {
                return Err(Error::Configuration(format!(
                    "exactly two datasets must be loaded (found {})",
                    datasets.len()
                )));
            };
            let assignments = assign_datapoints(coverage, [a, b], &mut *self.assignment_rng.lock())?;
            Ok(Session::new(
                SessionId::new(self.ids.uuid()),
                participant.clone(),
                assignments,
                self.clock.now(),
            ))
        })?;
        self.build_view(&session)
    }

    pub fn view(&self, id: &SessionId) -> Result<SessionView> {
        self.build_view(&self.store.session(id)?)
    }

    fn build_view(&self, session: &Session) -> Result<SessionView> {
        let item = session.phase.item();
        let (dataset, datapoint, transcript) = match item {
            Some(k) => {
                let a = session.assignment(k);
                (
                    Some(self.store.dataset(&a.dataset_id)?),
                    Some(self.store.datapoint(&a.datapoint_id)?),
                    self.store.transcript(&session.id, &a.datapoint_id),
                )
            }
            None => (None, None, Vec::new()),
        };
        let initial_answers = session
            .assignments
            .iter()
            .filter_map(|a| {
                self.store
                    .annotation(&session.id, &a.datapoint_id, Stage::Initial)
                    .map(|r| InitialSummary {
                        datapoint_id: a.datapoint_id.clone(),
                        label: r.label,
                    })
            })
            .collect();
        Ok(SessionView::build(ViewParts {
            session,
            dataset: dataset.as_ref(),
            datapoint: datapoint.as_ref(),
            transcript,
            initial_answers,
        }))
    }

    pub async fn submit_initial(
        &self,
        id: &SessionId,
        datapoint_id: &DatapointId,
        input: InitialInput,
    ) -> Result<SessionView> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        let dataset = self.dataset_of(&session, datapoint_id)?;
        let record = session.submit_initial(
            &dataset,
            datapoint_id,
            input,
            self.ids.uuid().into(),
            self.clock.now(),
        )?;
        self.store.commit(vec![
            StoreEvent::AnnotationAppended { record },
            StoreEvent::SessionSaved {
                session: session.clone(),
            },
        ])?;
        self.build_view(&session)
    }

    pub async fn submit_attention(
        &self,
        id: &SessionId,
        index: u8,
        option: &str,
    ) -> Result<(AttentionOutcome, SessionView)> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        let outcome = session.record_attention_check(index, option, self.clock.now())?;
        self.store.commit(vec![StoreEvent::SessionSaved {
            session: session.clone(),
        }])?;
        Ok((outcome, self.build_view(&session)?))
    }

    pub async fn confirm(&self, id: &SessionId) -> Result<SessionView> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        session.confirm_proceed(self.clock.now())?;
        let opener = self.opener_for(&session, 1)?;
        self.store.commit(vec![
            StoreEvent::SessionSaved {
                session: session.clone(),
            },
            StoreEvent::MessageAppended { message: opener },
        ])?;
        self.build_view(&session)
    }

    pub async fn acknowledge_break(&self, id: &SessionId) -> Result<SessionView> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        session.acknowledge_break(self.clock.now())?;
        let opener = self.opener_for(&session, 2)?;
        self.store.commit(vec![
            StoreEvent::SessionSaved {
                session: session.clone(),
            },
            StoreEvent::MessageAppended { message: opener },
        ])?;
        self.build_view(&session)
    }

    /// One discussion turn. A failed provider call leaves the transcript
    /// untouched; retrying with the same `client_message_id` after a
    /// success replays the stored turn instead of adding a message.
    pub async fn chat(
        &self,
        id: &SessionId,
        datapoint_id: &DatapointId,
        text: &str,
        client_message_id: Option<String>,
    ) -> Result<ChatReply> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        let item = session.item_of(datapoint_id)?;
        let transcript = self.store.transcript(id, datapoint_id);
        if let Some(cid) = &client_message_id {
            let transcript = DialogueTranscript {
                session_id: id.clone(),
                datapoint_id: datapoint_id.clone(),
                messages: transcript.clone(),
            };
            if let Some((a, s)) = transcript.replay(cid) {
                return Ok(ChatReply {
                    annotator: a.clone(),
                    socratic: s.clone(),
                    gate: session.gate(item).clone(),
                    replayed: true,
                });
            }
        }
        session.ensure_can_chat(datapoint_id)?;
        let context = self.prompt_context(&session, item)?;
        let system_prompt = assemble_system_prompt(&context)?;
        let transcript = DialogueTranscript {
            session_id: id.clone(),
            datapoint_id: datapoint_id.clone(),
            messages: transcript,
        };
        let outcome = next_turn(
            &transcript,
            &system_prompt,
            text,
            self.provider.as_ref(),
            &self.turn,
            TurnIds {
                annotator: self.ids.uuid().into(),
                socratic: self.ids.uuid().into(),
                client_message_id,
            },
            self.clock.as_ref(),
        )
        .await?;
        let gate = session.record_annotator_message(datapoint_id, self.clock.now())?;
        debug_assert_eq!(gate, outcome.gate);
        self.store.commit(vec![
            StoreEvent::MessageAppended {
                message: outcome.annotator.clone(),
            },
            StoreEvent::MessageAppended {
                message: outcome.socratic.clone(),
            },
            StoreEvent::SessionSaved { session },
        ])?;
        Ok(ChatReply {
            annotator: outcome.annotator,
            socratic: outcome.socratic,
            gate,
            replayed: false,
        })
    }

    pub async fn submit_reannotation(
        &self,
        id: &SessionId,
        datapoint_id: &DatapointId,
        input: PostInput,
    ) -> Result<SessionView> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        let dataset = self.dataset_of(&session, datapoint_id)?;
        let record = session.submit_reannotation(
            &dataset,
            datapoint_id,
            input,
            self.ids.uuid().into(),
            self.clock.now(),
        )?;
        self.store.commit(vec![
            StoreEvent::AnnotationAppended { record },
            StoreEvent::SessionSaved {
                session: session.clone(),
            },
        ])?;
        self.build_view(&session)
    }

    pub async fn submit_survey(&self, id: &SessionId, response: SurveyResponse) -> Result<SessionView> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        session.submit_survey(&response, self.clock.now())?;
        self.store.commit(vec![
            StoreEvent::SurveyAppended { response },
            StoreEvent::SessionSaved {
                session: session.clone(),
            },
        ])?;
        self.build_view(&session)
    }

    pub async fn flag_disqualification(
        &self,
        id: &SessionId,
        reason: DisqualificationReason,
    ) -> Result<ParticipantStatus> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.store.session(id)?;
        let status = session.flag_disqualification(reason, self.clock.now());
        self.store.commit(vec![StoreEvent::SessionSaved { session }])?;
        Ok(status)
    }

    fn dataset_of(&self, session: &Session, datapoint_id: &DatapointId) -> Result<crate::domain::Dataset> {
        let item = session.item_of(datapoint_id)?;
        self.store.dataset(&session.assignment(item).dataset_id)
    }

    fn prompt_context(&self, session: &Session, item: u8) -> Result<PromptContext> {
        let a = session.assignment(item);
        let dataset = self.store.dataset(&a.dataset_id)?;
        let dp = self.store.datapoint(&a.datapoint_id)?;
        let initial = self
            .store
            .annotation(&session.id, &a.datapoint_id, Stage::Initial)
            .ok_or_else(|| Error::Integrity(format!("no initial annotation for {}", a.datapoint_id)))?;
        Ok(PromptContext {
            dataset_context: dataset.task_context,
            datapoint_context: dp.item_context,
            datapoint_text: dp.text,
            chosen_label: initial.label.as_str().to_string(),
            options: dataset.label_options,
            confidence: initial.confidence,
        })
    }

    fn opener_for(&self, session: &Session, item: u8) -> Result<ChatMessage> {
        let ctx = self.prompt_context(session, item)?;
        opener_message(
            &ctx,
            self.ids.uuid().into(),
            session.id.clone(),
            session.assignment(item).datapoint_id.clone(),
            self.clock.now(),
        )
    }
}
