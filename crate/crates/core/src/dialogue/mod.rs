//! The Socratic side of a discussion: prompt assembly, reply guardrails and
//! the turn loop.

mod guardrail;
mod prompt;
mod turn;

pub use guardrail::{
    refusal_text, split_sentences, truncate_sentences, validate_reply, EnforcementMode,
    EnforcementPolicy, GuardrailViolation, ViolationKind, MAX_QUESTIONS, MAX_SENTENCES,
};
pub use prompt::{
    assemble_system_prompt, opener_message, opener_text, render_options, render_template,
    PromptContext, OPENER_TEMPLATE, PLACEHOLDERS, SYSTEM_PROMPT_TEMPLATE,
};
pub use turn::{
    next_turn, DialogueTranscript, TurnConfig, TurnIds, TurnOutcome, MAX_ANNOTATOR_CHARS,
};
