//! Questionnaire content delivered to the client, per phase.
//!
//! The wording is fixed study material; clients render whatever schema the
//! API hands them.

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, NOT_SURE_LABEL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QuestionKind {
    SingleChoice { options: Vec<Choice> },
    FreeText,
    Scale { min: u8, max: u8 },
}

/// A selectable answer: `value` is what the client submits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub value: String,
    pub text: String,
}

impl Choice {
    fn new(value: &str, text: &str) -> Self {
        Self {
            value: value.into(),
            text: text.into(),
        }
    }

    fn same(text: &str) -> Self {
        Self::new(text, text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub prompt: String,
    #[serde(flatten)]
    pub kind: QuestionKind,
    pub required: bool,
    /// `Some((question_id, value))`: shown only when that answer was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shown_if: Option<(String, String)>,
}

fn choice(id: &str, prompt: &str, options: Vec<Choice>) -> Question {
    Question {
        id: id.into(),
        prompt: prompt.into(),
        kind: QuestionKind::SingleChoice { options },
        required: true,
        shown_if: None,
    }
}

fn free_text(id: &str, prompt: &str) -> Question {
    Question {
        id: id.into(),
        prompt: prompt.into(),
        kind: QuestionKind::FreeText,
        required: false,
        shown_if: None,
    }
}

fn confidence_choices() -> Vec<Choice> {
    vec![
        Choice::new("very_sure", "Very Sure"),
        Choice::new("somewhat_sure", "Somewhat Sure"),
        Choice::new("not_sure", "Not Sure"),
    ]
}

fn yes_no(yes: &str, no: &str) -> Vec<Choice> {
    vec![Choice::new("true", yes), Choice::new("false", no)]
}

/// Questions asked for each item before deliberation.
pub fn annotation_questions(dataset: &Dataset) -> Vec<Question> {
    vec![
        choice(
            "label",
            "How would you label this item?",
            dataset.label_options.iter().map(|o| Choice::same(o)).collect(),
        ),
        choice(
            "confidence",
            "How confident are you that this annotation is correct?",
            confidence_choices(),
        ),
        choice(
            "discussion_would_help",
            "Do you believe that a discussion of this item would improve any uncertainty you or another annotator might have?",
            yes_no(
                "Yes, I think a discussion would help clarify how this item should be annotated",
                "No, I don't think a discussion would clarify this item",
            ),
        ),
        choice(
            "agreement_expectation",
            "Do you think other annotators would agree with your choice?",
            vec![
                Choice::new("most_agree", "I expect most people to agree with me"),
                Choice::new("half_agree", "I expect only about half of the people to agree with me"),
                Choice::new("most_disagree", "I expect most people to disagree with me"),
            ],
        ),
    ]
}

/// One of the two fixed attention-check items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttentionCheckItem {
    pub index: u8,
    pub prompt: &'static str,
    pub options: [&'static str; 3],
    pub correct_option: &'static str,
}

/// Presented in this order to every participant, one per annotated item.
pub const ATTENTION_CHECKS: [AttentionCheckItem; 2] = [
    AttentionCheckItem {
        index: 1,
        prompt: "Suppose that blue is your favorite color, but when asked, you always select red. What's your favorite color?",
        options: ["Blue", "Red", "Yellow"],
        correct_option: "Red",
    },
    AttentionCheckItem {
        index: 2,
        prompt: "Which do you prefer? Please select the option with the most letters.",
        options: ["Clouds", "Rain", "Sunshine"],
        correct_option: "Sunshine",
    },
];

pub fn attention_check(index: u8) -> Option<&'static AttentionCheckItem> {
    ATTENTION_CHECKS.iter().find(|c| c.index == index)
}

impl AttentionCheckItem {
    pub fn question(&self) -> Question {
        choice(
            &format!("attention_{}", self.index),
            self.prompt,
            self.options.iter().map(|o| Choice::same(o)).collect(),
        )
    }
}

/// Questions revealed once the dialogue gate unlocks.
pub fn reannotation_questions(dataset: &Dataset) -> Vec<Question> {
    let mut labels: Vec<Choice> = dataset.label_options.iter().map(|o| Choice::same(o)).collect();
    labels.push(Choice::same(NOT_SURE_LABEL));
    vec![
        choice("label", "After discussing this item, how would you label it?", labels),
        choice(
            "confidence",
            "How confident are you that your new label is correct?",
            confidence_choices(),
        ),
        choice(
            "discussion_helped",
            "Do you believe that this discussion helped clarify how you should label this item?",
            yes_no("Yes, this discussion helped", "No, I don't think this discussion helped"),
        ),
        choice(
            "doubted",
            "Did the chatbot make you doubt your original answer?",
            yes_no("Yes", "No"),
        ),
        choice(
            "changed_self_report",
            "Did the chatbot make you change your original answer?",
            yes_no("Yes", "No"),
        ),
        free_text("process_feeling", "Describe how you feel about this deliberation process."),
        free_text("outcome_feeling", "Describe how you feel about this deliberation outcome."),
    ]
}

/// Task-load items (physical demand omitted) followed by the experience
/// questions.
pub fn survey_questions() -> Vec<Question> {
    let scale = |id: &str, prompt: &str| Question {
        id: id.into(),
        prompt: prompt.into(),
        kind: QuestionKind::Scale { min: 1, max: 21 },
        required: true,
        shown_if: None,
    };
    let branch = |mut q: Question| {
        q.shown_if = Some(("q3_prior_deliberation".into(), "true".into()));
        q
    };
    vec![
        scale("tlx_mental", "How mentally demanding was the task?"),
        scale("tlx_temporal", "How hurried or rushed was the pace of the task?"),
        scale(
            "tlx_performance",
            "How successful were you in accomplishing what you were asked to do?",
        ),
        scale(
            "tlx_effort",
            "How hard did you have to work to accomplish your level of performance?",
        ),
        scale(
            "tlx_frustration",
            "How insecure, discouraged, irritated, stressed, and annoyed were you?",
        ),
        choice(
            "q1_importance",
            "Overall, how important do you consider discussions to be as part of the data annotation process?",
            vec![
                Choice::new("very_important", "Very important"),
                Choice::new("somewhat_important", "Somewhat important"),
                Choice::new("not_really_important", "Not really important"),
                Choice::new("not_important_at_all", "Not important at all"),
            ],
        ),
        free_text(
            "q2_opinions",
            "If you have additional opinions about discussions during labeling, please explain here.",
        ),
        choice(
            "q3_prior_deliberation",
            "Have you ever discussed which label a datapoint should have with another person as part of an annotation task?",
            yes_no("Yes", "No"),
        ),
        branch(choice(
            "q4_prior_helpfulness",
            "On average, were the discussions you had with other annotators helpful in making your own decisions?",
            vec![
                Choice::new("very_helpful", "Yes, very helpful"),
                Choice::new("somewhat_helpful", "Yes, somewhat helpful"),
                Choice::new("not_very_helpful", "No, not very helpful"),
                Choice::new("made_task_harder", "Not, it made the task harder"),
            ],
        )),
        branch(choice(
            "q5_vs_human",
            "Was this experience with the chatbot more or less helpful than your annotation discussions with people?",
            vec![
                Choice::new("more_helpful", "More helpful (I liked the chatbot a lot more.)"),
                Choice::new(
                    "somewhat_more_helpful",
                    "Somewhat helpful (I liked the chatbot more, but not by much.)",
                ),
                Choice::new(
                    "less_helpful",
                    "Less helpful (I preferred human discussions more, but the chatbot was fine.)",
                ),
                Choice::new(
                    "not_nearly_as_helpful",
                    "Not nearly as helpful (My discussions with people were more beneficial.)",
                ),
            ],
        )),
        choice(
            "q6_would_use",
            "Would you use an annotation system that involved an AI chatbot as part of the process in the future?",
            vec![
                Choice::new("yes", "Yes"),
                Choice::new("no", "No"),
                Choice::new("not_sure", "Not sure"),
            ],
        ),
        free_text("q7_why", "Please explain why:"),
        free_text(
            "q8_feedback",
            "Please provide any additional feedback you are willing to share here.",
        ),
    ]
}
