use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::domain::{ChatMessage, ConfidenceLevel, Role};
use crate::error::{Error, Result};
use crate::ids::{DatapointId, MessageId, SessionId};

pub const SYSTEM_PROMPT_TEMPLATE: &str = include_str!("../../templates/system_prompt.txt");
pub const OPENER_TEMPLATE: &str = include_str!("../../templates/opener.txt");

/// Every placeholder the templates may use.
pub const PLACEHOLDERS: [&str; 6] = [
    "dataset.context",
    "datapoint.context",
    "datapoint.text",
    "annotation.label",
    "dataset.options",
    "confidence",
];

/// Everything the templates interpolate for one (datapoint, initial
/// annotation) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptContext {
    pub dataset_context: String,
    pub datapoint_context: String,
    pub datapoint_text: String,
    pub chosen_label: String,
    pub options: [String; 2],
    pub confidence: ConfidenceLevel,
}

impl PromptContext {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("dataset.context", &self.dataset_context),
            ("datapoint.context", &self.datapoint_context),
            ("datapoint.text", &self.datapoint_text),
            ("annotation.label", &self.chosen_label),
            ("dataset.options[0]", &self.options[0]),
            ("dataset.options[1]", &self.options[1]),
        ];
        for (name, value) in fields {
            if value.trim().is_empty() {
                return Err(Error::Template(format!("no value for {name}")));
            }
        }
        if !self.options.contains(&self.chosen_label) {
            return Err(Error::Template(format!(
                "label {:?} is not one of the options",
                self.chosen_label
            )));
        }
        Ok(())
    }

    fn values(&self) -> [(&'static str, String); 6] {
        [
            ("dataset.context", self.dataset_context.clone()),
            ("datapoint.context", self.datapoint_context.clone()),
            ("datapoint.text", self.datapoint_text.clone()),
            ("annotation.label", self.chosen_label.clone()),
            ("dataset.options", render_options(&self.options)),
            ("confidence", self.confidence.phrase().to_string()),
        ]
    }
}

/// `"A" or "B"`
pub fn render_options(options: &[String; 2]) -> String {
    format!("\"{}\" or \"{}\"", options[0], options[1])
}

/// Single-pass `{{name}}` substitution. Unknown or unterminated
/// placeholders are template errors; substituted values are never
/// re-scanned.
pub fn render_template(template: &str, values: &[(&str, String)]) -> Result<String> {
    let template = template.strip_suffix('\n').unwrap_or(template);
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        let close = after
            .find("}}")
            .ok_or_else(|| Error::Template("unterminated placeholder".into()))?;
        let name = after[..close].trim();
        let value = values
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Template(format!("no value for placeholder {name:?}")))?;
        out.push_str(value);
        rest = &after[close + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn assemble_system_prompt(ctx: &PromptContext) -> Result<String> {
    ctx.validate()?;
    render_template(SYSTEM_PROMPT_TEMPLATE, &ctx.values())
}

pub fn opener_text(ctx: &PromptContext) -> Result<String> {
    ctx.validate()?;
    render_template(OPENER_TEMPLATE, &ctx.values())
}

/// The seq-0 Socratic message that opens every discussion.
pub fn opener_message(
    ctx: &PromptContext,
    id: MessageId,
    session_id: SessionId,
    datapoint_id: DatapointId,
    now: Timestamp,
) -> Result<ChatMessage> {
    Ok(ChatMessage {
        id,
        session_id,
        datapoint_id,
        seq: 0,
        role: Role::Socratic,
        text: opener_text(ctx)?,
        created_at: now,
        violations: Vec::new(),
        client_message_id: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PromptContext {
        PromptContext {
            dataset_context: "Decide whether the review is sarcastic.".into(),
            datapoint_context: "Product: kettle".into(),
            datapoint_text: "Best kettle ever, if you like cold tea.".into(),
            chosen_label: "Sarcastic".into(),
            options: ["Sarcastic".into(), "Not Sarcastic".into()],
            confidence: ConfidenceLevel::SomewhatSure,
        }
    }

    #[test]
    fn templates_use_only_known_placeholders() {
        for template in [SYSTEM_PROMPT_TEMPLATE, OPENER_TEMPLATE] {
            let mut rest = template;
            while let Some(i) = rest.find("{{") {
                let end = rest[i..].find("}}").unwrap();
                assert!(PLACEHOLDERS.contains(&&rest[i + 2..i + end]));
                rest = &rest[i + end + 2..];
            }
        }
    }

    #[test]
    fn interpolates_label_and_confidence() {
        let p = assemble_system_prompt(&ctx()).unwrap();
        assert!(p.contains("chosen the label \"Sarcastic\""));
        assert!(p.contains("They are somewhat sure confident"));
        assert!(p.ends_with("confident in this choice."));
        assert!(p.contains("Rules are always more important than the traits or steps."));
    }

    #[test]
    fn values_are_not_rescanned() {
        let mut c = ctx();
        c.datapoint_text = "{{confidence}}".into();
        let p = assemble_system_prompt(&c).unwrap();
        assert!(p.contains("being annotated: \"{{confidence}}\""));
    }

    #[test]
    fn empty_fields_are_template_errors() {
        let mut c = ctx();
        c.datapoint_text = String::new();
        assert!(matches!(assemble_system_prompt(&c), Err(Error::Template(_))));
        let mut c = ctx();
        c.chosen_label = "Maybe".into();
        assert!(matches!(opener_text(&c), Err(Error::Template(_))));
        assert!(render_template("{{nope}}", &[]).is_err());
        assert!(render_template("{{open", &[]).is_err());
    }

    #[test]
    fn opener_for_not_sure_confidence() {
        let mut c = ctx();
        c.confidence = ConfidenceLevel::NotSure;
        assert!(opener_text(&c).unwrap().contains("seem not sure confident"));
    }
}
