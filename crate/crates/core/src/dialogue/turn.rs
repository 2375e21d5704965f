use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::guardrail::{truncate_sentences, validate_reply, EnforcementMode, EnforcementPolicy};
use super::{GuardrailViolation, ViolationKind, MAX_SENTENCES};
use crate::clock::Clock;
use crate::domain::{ChatMessage, Role};
use crate::error::{Error, Result};
use crate::ids::{DatapointId, MessageId, SessionId};
use crate::provider::{ChatProvider, ChatRequest, HistoryEntry};
use crate::session::{DialogueGate, MIN_ANNOTATOR_MESSAGES};

/// Longest annotator message accepted, in characters.
pub const MAX_ANNOTATOR_CHARS: usize = 4_000;

/// One discussion: the opener followed by alternating annotator and
/// Socratic messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueTranscript {
    pub session_id: SessionId,
    pub datapoint_id: DatapointId,
    pub messages: Vec<ChatMessage>,
}

impl DialogueTranscript {
    pub fn new(opener: ChatMessage) -> Self {
        Self {
            session_id: opener.session_id.clone(),
            datapoint_id: opener.datapoint_id.clone(),
            messages: vec![opener],
        }
    }

    pub fn annotator_count(&self) -> u32 {
        self.messages
            .iter()
            .filter(|m| m.role == Role::Annotator)
            .count() as u32
    }

    pub fn gate(&self) -> DialogueGate {
        let count = self.annotator_count();
        DialogueGate {
            datapoint_id: self.datapoint_id.clone(),
            annotator_message_count: count,
            unlocked: count >= MIN_ANNOTATOR_MESSAGES,
        }
    }

    /// The Socratic reply that followed the annotator message carrying
    /// `client_message_id`, if that turn already completed.
    pub fn replay(&self, client_message_id: &str) -> Option<(&ChatMessage, &ChatMessage)> {
        let i = self
            .messages
            .iter()
            .position(|m| m.client_message_id.as_deref() == Some(client_message_id))?;
        Some((&self.messages[i], self.messages.get(i + 1)?))
    }

    pub fn push_turn(&mut self, outcome: &TurnOutcome) {
        self.messages.push(outcome.annotator.clone());
        self.messages.push(outcome.socratic.clone());
    }

    fn history(&self) -> Vec<HistoryEntry> {
        self.messages
            .iter()
            .map(|m| HistoryEntry {
                role: m.role,
                text: m.text.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnIds {
    pub annotator: MessageId,
    pub socratic: MessageId,
    pub client_message_id: Option<String>,
}

/// Request parameters and guardrail policy for each turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnConfig {
    #[serde(default)]
    pub policy: EnforcementPolicy,
    pub temperature: f64,
    pub max_reply_tokens: u32,
    #[serde(with = "secs")]
    pub timeout: Duration,
}

impl Default for TurnConfig {
    fn default() -> Self {
        Self {
            policy: EnforcementPolicy::default(),
            temperature: ChatRequest::DEFAULT_TEMPERATURE,
            max_reply_tokens: ChatRequest::DEFAULT_MAX_REPLY_TOKENS,
            timeout: ChatRequest::DEFAULT_TIMEOUT,
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnOutcome {
    pub annotator: ChatMessage,
    pub socratic: ChatMessage,
    pub gate: DialogueGate,
    pub regenerations: u32,
}

/// Runs one annotator -> Socratic exchange without mutating `transcript`.
///
/// The provider sees the system prompt and the whole history including the
/// new annotator message. Violations stored on the reply are those of the
/// last reply received, before any truncation.
#[allow(clippy::too_many_arguments)]
pub async fn next_turn(
    transcript: &DialogueTranscript,
    system_prompt: &str,
    annotator_text: &str,
    provider: &dyn ChatProvider,
    config: &TurnConfig,
    ids: TurnIds,
    clock: &dyn Clock,
) -> Result<TurnOutcome> {
    let last = transcript
        .messages
        .last()
        .ok_or_else(|| Error::Contract("transcript has no opener".into()))?;
    if last.role != Role::Socratic {
        return Err(Error::Contract("it is not the annotator's turn".into()));
    }
    let text = annotator_text.trim();
    if text.is_empty() {
        return Err(Error::Validation("message is empty".into()));
    }
    if text.chars().count() > MAX_ANNOTATOR_CHARS {
        return Err(Error::Validation(format!(
            "message is longer than {MAX_ANNOTATOR_CHARS} characters"
        )));
    }

    let seq = last.seq + 1;
    let annotator = ChatMessage {
        id: ids.annotator,
        session_id: transcript.session_id.clone(),
        datapoint_id: transcript.datapoint_id.clone(),
        seq,
        role: Role::Annotator,
        text: text.to_string(),
        created_at: clock.now(),
        violations: Vec::new(),
        client_message_id: ids.client_message_id,
    };
    let mut history = transcript.history();
    history.push(HistoryEntry {
        role: Role::Annotator,
        text: annotator.text.clone(),
    });
    let request = ChatRequest {
        system_prompt: system_prompt.to_string(),
        history,
        max_reply_tokens: config.max_reply_tokens,
        temperature: config.temperature,
        timeout: config.timeout,
    };
    request.validate()?;

    let policy = config.policy;
    let mut reply = provider.complete(&request).await?;
    let mut violations = validate_reply(&reply);
    let mut regenerations = 0;
    if policy.mode != EnforcementMode::LogOnly {
        while !violations.is_empty() && regenerations < policy.max_regenerations {
            regenerations += 1;
            debug!(regenerations, ?violations, "regenerating non-compliant reply");
            reply = provider.complete(&request).await?;
            violations = validate_reply(&reply);
        }
    }
    if !violations.is_empty() {
        warn!(session = %transcript.session_id, datapoint = %transcript.datapoint_id, ?violations, "reply breaks guardrails");
    }
    if policy.mode == EnforcementMode::RegenerateThenTruncate && too_long(&violations) {
        reply = truncate_sentences(&reply, MAX_SENTENCES);
    }

    let socratic = ChatMessage {
        id: ids.socratic,
        session_id: transcript.session_id.clone(),
        datapoint_id: transcript.datapoint_id.clone(),
        seq: seq + 1,
        role: Role::Socratic,
        text: reply,
        created_at: clock.now(),
        violations,
        client_message_id: None,
    };
    let mut gate = transcript.gate();
    gate.record_message();
    Ok(TurnOutcome {
        annotator,
        socratic,
        gate,
        regenerations,
    })
}

fn too_long(violations: &[GuardrailViolation]) -> bool {
    violations
        .iter()
        .any(|v| matches!(v.kind, ViolationKind::TooManySentences { .. }))
}
