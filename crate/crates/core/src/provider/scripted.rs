use std::collections::BTreeMap;

use async_trait::async_trait;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ChatProvider, ChatRequest, ProviderError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScriptMode {
    /// Replies with the latest annotator message.
    Echo,
    /// Reply `i` answers annotator turn `i + 1`; the last reply repeats.
    FixedScript { replies: Vec<String> },
    /// Candidate replies per annotator turn (1-based). Turns past the last
    /// key use the last key's templates. `{last}` expands to the latest
    /// annotator message.
    RuleBased { templates: BTreeMap<u32, Vec<String>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedBehavior {
    #[serde(flatten)]
    pub mode: ScriptMode,
    #[serde(default)]
    pub seed: u64,
}

impl ScriptedBehavior {
    pub fn validate(&self) -> Result<(), ProviderError> {
        let empty = match &self.mode {
            ScriptMode::Echo => false,
            ScriptMode::FixedScript { replies } => replies.is_empty(),
            ScriptMode::RuleBased { templates } => {
                templates.is_empty() || templates.values().any(Vec::is_empty)
            }
        };
        if empty {
            return Err(ProviderError::InvalidRequest("script has no replies".into()));
        }
        Ok(())
    }

    /// A short, guardrail-compliant Socratic script used by simulations.
    pub fn socratic_default(seed: u64) -> Self {
        let t = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let templates = BTreeMap::from([
            (
                1,
                t(&[
                    "I understand your reasoning. Can you point to specific text?",
                    "Thanks for walking me through that. Which words stood out to you the most?",
                ]),
            ),
            (
                2,
                t(&[
                    "That makes sense to me. Would your answer change if the tone were flatter?",
                    "Good point. How would you label a similar text without that phrase?",
                ]),
            ),
            (
                3,
                t(&[
                    "Your reasoning sounds consistent. Feel free to re-annotate the item below the chat when you're ready.",
                ]),
            ),
        ]);
        Self {
            mode: ScriptMode::RuleBased { templates },
            seed,
        }
    }
}

/// Deterministic provider: the reply depends only on the behavior, the
/// request history and the seed.
#[derive(Debug, Clone)]
pub struct ScriptedProvider {
    behavior: ScriptedBehavior,
}

impl ScriptedProvider {
    pub fn new(behavior: ScriptedBehavior) -> Result<Self, ProviderError> {
        behavior.validate()?;
        Ok(Self { behavior })
    }

    pub fn reply(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        request.validate()?;
        let turn = request.turn();
        let last = request.last_annotator_text().unwrap_or_default();
        Ok(match &self.behavior.mode {
            ScriptMode::Echo => last.to_string(),
            ScriptMode::FixedScript { replies } => {
                replies[turn.saturating_sub(1).min(replies.len() - 1)].clone()
            }
            ScriptMode::RuleBased { templates } => {
                let turn = turn as u32;
                let candidates = templates
                    .range(..=turn)
                    .next_back()
                    .or_else(|| templates.iter().next())
                    .map(|(_, v)| v)
                    .expect("validated non-empty");
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.behavior.seed ^ u64::from(turn).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                let pick = &candidates[rng.random_range(0..candidates.len())];
                pick.replace("{last}", last)
            }
        })
    }
}

#[async_trait]
impl ChatProvider for ScriptedProvider {
    async fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        self.reply(request)
    }
}
