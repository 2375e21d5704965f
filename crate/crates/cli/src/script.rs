//! Declarative annotator script for headless simulation.
//!
//! Chat turns map a 1-based turn index to message text; each phase maps to
//! the answers a simulated participant gives. Choices with a probability
//! are drawn from the participant's own RNG, so one seed fixes a run.
//!
//! ```toml
//! [chat]
//! 1 = "I went with {label} because of the wording."
//! 2 = "Mostly the last sentence."
//!
//! [initial]
//! first_option = 0.5
//! confidence = { not_sure = 1, somewhat_sure = 4, very_sure = 5 }
//! discussion_would_help = 0.6
//! agreement_expectation = "most_agree"
//!
//! [attention]
//! answers = ["Red", "Sunshine"]
//!
//! [post]
//! flip = 0.15
//! not_sure = 0.02
//! confidence = { not_sure = 0, somewhat_sure = 2, very_sure = 8 }
//! discussion_helped = 0.7
//! doubted = 0.3
//! changed_self_report = 0.1
//!
//! [survey]
//! tlx = { mental = 9, temporal = 6, performance = 5, effort = 8, frustration = 4 }
//! tlx_spread = 3
//! importance = "somewhat_important"
//! prior_deliberation = false
//! would_use = "yes"
//! ```
//!
//! In chat text `{label}` is the participant's initial label and `{other}`
//! the other option.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use socratic_core::domain::{
    AgreementExpectation, ConfidenceLevel, Importance, InitialAnswers, PostAnswers,
    PriorHelpfulness, SurveyResponse, TlxScores, VersusHuman, WouldUse, NOT_SURE_LABEL,
};
use socratic_core::ids::SessionId;
use socratic_core::session::{InitialInput, PostInput, MIN_ANNOTATOR_MESSAGES};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatorScript {
    pub chat: BTreeMap<String, String>,
    #[serde(default)]
    pub initial: InitialPhase,
    #[serde(default)]
    pub attention: AttentionPhase,
    #[serde(default)]
    pub post: PostPhase,
    #[serde(default)]
    pub survey: SurveyPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceWeights {
    #[serde(default)]
    pub not_sure: u32,
    #[serde(default)]
    pub somewhat_sure: u32,
    #[serde(default)]
    pub very_sure: u32,
}

impl ConfidenceWeights {
    fn draw(&self, rng: &mut impl Rng) -> ConfidenceLevel {
        let w = [self.not_sure, self.somewhat_sure, self.very_sure];
        let index = WeightedIndex::new(w).expect("validated weights");
        ConfidenceLevel::ALL[index.sample(rng)]
    }

    fn validate(&self, phase: &str) -> Result<()> {
        if self.not_sure + self.somewhat_sure + self.very_sure == 0 {
            return Err(CliError::Validation(format!("{phase}.confidence weights are all zero")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPhase {
    /// Probability of choosing the first label option.
    pub first_option: f64,
    pub confidence: ConfidenceWeights,
    pub discussion_would_help: f64,
    pub agreement_expectation: AgreementExpectation,
}

impl Default for InitialPhase {
    fn default() -> Self {
        Self {
            first_option: 0.5,
            confidence: ConfidenceWeights {
                not_sure: 1,
                somewhat_sure: 4,
                very_sure: 5,
            },
            discussion_would_help: 0.6,
            agreement_expectation: AgreementExpectation::MostAgree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttentionPhase {
    /// Answer to each attention check, in check order.
    pub answers: [String; 2],
}

impl Default for AttentionPhase {
    fn default() -> Self {
        Self {
            answers: ["Red".into(), "Sunshine".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostPhase {
    /// Probability of switching to the other option.
    pub flip: f64,
    /// Probability of answering "Not Sure"; checked before `flip`.
    pub not_sure: f64,
    pub confidence: ConfidenceWeights,
    pub discussion_helped: f64,
    pub doubted: f64,
    pub changed_self_report: f64,
    #[serde(default)]
    pub process_feeling: String,
    #[serde(default)]
    pub outcome_feeling: String,
}

impl Default for PostPhase {
    fn default() -> Self {
        Self {
            flip: 0.15,
            not_sure: 0.02,
            confidence: ConfidenceWeights {
                not_sure: 0,
                somewhat_sure: 2,
                very_sure: 8,
            },
            discussion_helped: 0.7,
            doubted: 0.3,
            changed_self_report: 0.1,
            process_feeling: String::new(),
            outcome_feeling: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyPhase {
    pub tlx: TlxScores,
    /// Each TLX item is moved by up to this much, clamped to 1..=21.
    #[serde(default)]
    pub tlx_spread: u8,
    pub importance: Importance,
    pub prior_deliberation: bool,
    #[serde(default)]
    pub prior_helpfulness: Option<PriorHelpfulness>,
    #[serde(default)]
    pub versus_human: Option<VersusHuman>,
    pub would_use: WouldUse,
}

impl Default for SurveyPhase {
    fn default() -> Self {
        Self {
            tlx: TlxScores {
                mental: 9,
                temporal: 6,
                performance: 5,
                effort: 8,
                frustration: 4,
            },
            tlx_spread: 3,
            importance: Importance::SomewhatImportant,
            prior_deliberation: false,
            prior_helpfulness: None,
            versus_human: None,
            would_use: WouldUse::Yes,
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Validation(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

impl AnnotatorScript {
    pub fn parse(text: &str) -> Result<Self> {
        let script: Self = toml::from_str(text)
            .map_err(|e| CliError::Validation(format!("annotator script: {e}")))?;
        script.validate()?;
        Ok(script)
    }

    pub fn validate(&self) -> Result<()> {
        let turns = self.turns()?;
        if turns.len() < MIN_ANNOTATOR_MESSAGES as usize {
            return Err(CliError::Validation(format!(
                "chat needs at least {MIN_ANNOTATOR_MESSAGES} turns, found {}",
                turns.len()
            )));
        }
        if turns.iter().any(|t| t.trim().is_empty()) {
            return Err(CliError::Validation("chat turns must not be empty".into()));
        }
        check_probability("initial.first_option", self.initial.first_option)?;
        check_probability("initial.discussion_would_help", self.initial.discussion_would_help)?;
        check_probability("post.flip", self.post.flip)?;
        check_probability("post.not_sure", self.post.not_sure)?;
        check_probability("post.discussion_helped", self.post.discussion_helped)?;
        check_probability("post.doubted", self.post.doubted)?;
        check_probability("post.changed_self_report", self.post.changed_self_report)?;
        self.initial.confidence.validate("initial")?;
        self.post.confidence.validate("post")?;
        self.survey_response(SessionId::new("check"), &mut ChaCha8Rng::seed_from_u64(0))
            .validate()
            .map_err(|e| CliError::Validation(format!("survey: {e}")))?;
        Ok(())
    }

    /// Chat messages in turn order. Keys must be 1, 2, ... without gaps.
    pub fn turns(&self) -> Result<Vec<&str>> {
        let mut indexed = Vec::new();
        for (key, text) in &self.chat {
            let index: usize = key
                .parse()
                .map_err(|_| CliError::Validation(format!("chat turn {key:?} is not a number")))?;
            indexed.push((index, text.as_str()));
        }
        indexed.sort_by_key(|(i, _)| *i);
        for (expected, (i, _)) in indexed.iter().enumerate() {
            if *i != expected + 1 {
                return Err(CliError::Validation(format!(
                    "chat turns must be numbered 1..{} without gaps",
                    indexed.len()
                )));
            }
        }
        Ok(indexed.into_iter().map(|(_, t)| t).collect())
    }

    pub fn initial_input(&self, options: &[String; 2], rng: &mut impl Rng) -> InitialInput {
        let p = &self.initial;
        let label = if rng.random_bool(p.first_option) {
            &options[0]
        } else {
            &options[1]
        };
        InitialInput {
            label: label.clone(),
            confidence: p.confidence.draw(rng),
            answers: InitialAnswers {
                discussion_would_help: rng.random_bool(p.discussion_would_help),
                agreement_expectation: p.agreement_expectation,
            },
        }
    }

    pub fn post_input(&self, options: &[String; 2], initial: &str, rng: &mut impl Rng) -> PostInput {
        let p = &self.post;
        let label = if rng.random_bool(p.not_sure) {
            NOT_SURE_LABEL.to_string()
        } else if rng.random_bool(p.flip) {
            other_option(options, initial).to_string()
        } else {
            initial.to_string()
        };
        PostInput {
            label,
            confidence: p.confidence.draw(rng),
            answers: PostAnswers {
                discussion_helped: rng.random_bool(p.discussion_helped),
                doubted: rng.random_bool(p.doubted),
                changed_self_report: rng.random_bool(p.changed_self_report),
                process_feeling: p.process_feeling.clone(),
                outcome_feeling: p.outcome_feeling.clone(),
            },
        }
    }

    pub fn chat_message(turn: &str, options: &[String; 2], initial: &str) -> String {
        turn.replace("{label}", initial)
            .replace("{other}", other_option(options, initial))
    }

    pub fn survey_response(&self, session_id: SessionId, rng: &mut impl Rng) -> SurveyResponse {
        let s = &self.survey;
        let spread = i16::from(s.tlx_spread);
        let mut jitter = |v: u8| {
            let delta = if spread == 0 { 0 } else { rng.random_range(-spread..=spread) };
            (i16::from(v) + delta).clamp(1, 21) as u8
        };
        let tlx = TlxScores {
            mental: jitter(s.tlx.mental),
            temporal: jitter(s.tlx.temporal),
            performance: jitter(s.tlx.performance),
            effort: jitter(s.tlx.effort),
            frustration: jitter(s.tlx.frustration),
        };
        SurveyResponse {
            session_id,
            tlx,
            q1_importance: s.importance,
            q2_opinions: String::new(),
            q3_prior_deliberation: s.prior_deliberation,
            q4_prior_helpfulness: s.prior_helpfulness,
            q5_vs_human: s.versus_human,
            q6_would_use: s.would_use,
            q7_why: String::new(),
            q8_feedback: String::new(),
        }
    }
}

fn other_option<'a>(options: &'a [String; 2], label: &str) -> &'a str {
    if options[0] == label {
        &options[1]
    } else {
        &options[0]
    }
}

impl Default for AnnotatorScript {
    fn default() -> Self {
        Self {
            chat: BTreeMap::from([
                ("1".into(), "I picked {label} because of how the sentence is worded.".into()),
                ("2".into(), "Mostly the ending, it seems to point that way.".into()),
            ]),
            initial: InitialPhase::default(),
            attention: AttentionPhase::default(),
            post: PostPhase::default(),
            survey: SurveyPhase::default(),
        }
    }
}
