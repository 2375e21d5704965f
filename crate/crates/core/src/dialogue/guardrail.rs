use std::ops::Range;

use serde::{Deserialize, Serialize};

pub const MAX_SENTENCES: usize = 3;
pub const MAX_QUESTIONS: usize = 1;

const REFUSAL: &str = "I can't provide any additional information outside what was given for the task. You should use your own knowledge and experience to help inform your choice.";

/// Tokens that end in a period without ending a sentence, compared
/// lower-case and without the final period.
const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "etc", "vs", "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "no", "approx",
    "u.s", "a.m", "p.m", "cf",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];

/// The canned answer to requests for information outside the task.
pub fn refusal_text() -> &'static str {
    REFUSAL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    TooManySentences { count: usize },
    MultipleQuestions { count: usize },
    ExternalInfoLeak,
    OffTask,
    FormattingCharacters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardrailViolation {
    #[serde(flatten)]
    pub kind: ViolationKind,
    /// Byte range of the offending text.
    pub span: Range<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnforcementMode {
    #[default]
    LogOnly,
    RegenerateThenPass,
    RegenerateThenTruncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnforcementPolicy {
    #[serde(default)]
    pub mode: EnforcementMode,
    #[serde(default = "default_regenerations")]
    pub max_regenerations: u32,
}

fn default_regenerations() -> u32 {
    2
}

impl Default for EnforcementPolicy {
    fn default() -> Self {
        Self {
            mode: EnforcementMode::LogOnly,
            max_regenerations: default_regenerations(),
        }
    }
}

fn abbreviation_before(text: &str, dot: usize) -> bool {
    let start = text[..dot]
        .char_indices()
        .rev()
        .find(|&(_, c)| c.is_whitespace() || c == '(' || c == '"')
        .map_or(0, |(i, c)| i + c.len_utf8());
    let word = text[start..dot].to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Byte ranges of the sentences in `text`, leading whitespace trimmed.
///
/// A sentence ends at a run of `.`, `!` or `?` (optionally followed by
/// closing quotes or brackets) that is followed by whitespace or the end of
/// the text. A lone period after a known abbreviation does not end a
/// sentence, and neither does an ellipsis unless the text ends there.
/// Decimals such as `3.5` never split because no whitespace follows the
/// period. Trailing text without a terminator is a final sentence.
pub fn split_sentences(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() && !c.is_whitespace() {
            start = Some(pos);
        }
        if !matches!(c, '.' | '!' | '?' | '\u{2026}') {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && matches!(chars[i].1, '.' | '!' | '?' | '\u{2026}') {
            i += 1;
        }
        let run: String = chars[run_start..i].iter().map(|&(_, c)| c).collect();
        while i < chars.len() && CLOSERS.contains(&chars[i].1) {
            i += 1;
        }
        let end = chars.get(i).map_or(text.len(), |&(p, _)| p);
        let at_end = i == chars.len();
        let followed_by_space = at_end || chars[i].1.is_whitespace();
        if !followed_by_space {
            continue;
        }
        let ellipsis = run.contains('\u{2026}') || run.matches('.').count() > 1;
        let abbreviation = run == "." && abbreviation_before(text, pos);
        if (ellipsis && !at_end_ignoring_space(text, end)) || abbreviation {
            continue;
        }
        if let Some(s) = start.take() {
            out.push(s..end);
        }
    }
    if let Some(s) = start {
        let tail = text[s..].trim_end();
        if tail.chars().any(char::is_alphanumeric) {
            out.push(s..s + tail.len());
        }
    }
    out
}

fn at_end_ignoring_space(text: &str, end: usize) -> bool {
    text[end..].trim().is_empty()
}

fn is_question(text: &str, sentence: &Range<usize>) -> bool {
    text[sentence.clone()]
        .trim_end_matches(CLOSERS)
        .ends_with('?')
}

/// Checks a Socratic reply against the length, question and formatting
/// rules. An empty list means compliant.
pub fn validate_reply(text: &str) -> Vec<GuardrailViolation> {
    let mut out = Vec::new();
    let sentences = split_sentences(text);
    if sentences.len() > MAX_SENTENCES {
        out.push(GuardrailViolation {
            kind: ViolationKind::TooManySentences {
                count: sentences.len(),
            },
            span: sentences[MAX_SENTENCES].start..sentences[sentences.len() - 1].end,
            detail: format!(
                "{} sentences, at most {MAX_SENTENCES} allowed",
                sentences.len()
            ),
        });
    }
    let questions: Vec<&Range<usize>> =
        sentences.iter().filter(|s| is_question(text, s)).collect();
    if questions.len() > MAX_QUESTIONS {
        out.push(GuardrailViolation {
            kind: ViolationKind::MultipleQuestions {
                count: questions.len(),
            },
            span: questions[MAX_QUESTIONS].start..questions[questions.len() - 1].end,
            detail: format!("{} questions in one message", questions.len()),
        });
    }
    if let Some(span) = formatting_span(text) {
        out.push(GuardrailViolation {
            kind: ViolationKind::FormattingCharacters,
            detail: format!("markup {:?}", &text[span.clone()]),
            span,
        });
    }
    if let Some(span) = url_span(text) {
        out.push(GuardrailViolation {
            kind: ViolationKind::ExternalInfoLeak,
            detail: format!("link {:?}", &text[span.clone()]),
            span,
        });
    }
    out
}

fn formatting_span(text: &str) -> Option<Range<usize>> {
    if let Some(i) = text.find(['*', '`']) {
        return Some(i..i + 1);
    }
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        let lead = offset + line.len() - trimmed.len();
        offset += line.len();
        let marker_len = if trimmed.starts_with('#') {
            Some(trimmed.len() - trimmed.trim_start_matches('#').len())
        } else if ["- ", "+ ", "\u{2022}"].iter().any(|m| trimmed.starts_with(m)) {
            Some(trimmed.chars().next().map_or(1, char::len_utf8))
        } else {
            let digits = trimmed.len() - trimmed.trim_start_matches(|c: char| c.is_ascii_digit()).len();
            let rest = &trimmed[digits..];
            (digits > 0 && (rest.starts_with(". ") || rest.starts_with(") "))).then_some(digits + 1)
        };
        if let Some(len) = marker_len {
            return Some(lead..lead + len);
        }
    }
    None
}

fn url_span(text: &str) -> Option<Range<usize>> {
    let lower = text.to_ascii_lowercase();
    let start = ["http://", "https://", "www."]
        .iter()
        .filter_map(|p| lower.find(p))
        .min()?;
    let len = text[start..]
        .find(char::is_whitespace)
        .unwrap_or(text.len() - start);
    Some(start..start + len)
}

/// Keeps the first `n` sentences.
pub fn truncate_sentences(text: &str, n: usize) -> String {
    let sentences = split_sentences(text);
    match sentences.get(n.saturating_sub(1)) {
        Some(last) if sentences.len() > n && n > 0 => text[..last.end].trim_start().to_string(),
        _ => text.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<ViolationKind> {
        validate_reply(text).into_iter().map(|v| v.kind).collect()
    }

    #[test]
    fn documented_cases() {
        assert_eq!(
            kinds("One. Two. Three. Four."),
            vec![ViolationKind::TooManySentences { count: 4 }]
        );
        assert_eq!(
            kinds("Why did you pick that? What about the title?"),
            vec![ViolationKind::MultipleQuestions { count: 2 }]
        );
        assert!(kinds("I follow your logic there. Do you see any sarcasm in the title?").is_empty());
    }

    #[test]
    fn refusal_is_compliant() {
        assert!(refusal_text().starts_with("I can't provide any additional information"));
        assert!(validate_reply(refusal_text()).is_empty());
        let with_question = format!("{} What have you seen before?", refusal_text());
        assert!(validate_reply(&with_question).is_empty());
    }

    #[test]
    fn splitter_guards() {
        assert_eq!(split_sentences("It costs 3.5 dollars. Right?").len(), 2);
        assert_eq!(split_sentences("Look at e.g. the title. Hm.").len(), 2);
        assert_eq!(split_sentences("Well... maybe. Sure").len(), 2);
        assert_eq!(split_sentences("He said \"wow!\" and left.").len(), 2);
        assert_eq!(split_sentences("\"Really?\" Yes.").len(), 2);
        assert_eq!(split_sentences("Wait...").len(), 1);
        assert!(split_sentences("   ").is_empty());
        assert_eq!(split_sentences("no terminator here").len(), 1);
    }

    #[test]
    fn formatting() {
        assert_eq!(kinds("This is **bold**."), vec![ViolationKind::FormattingCharacters]);
        assert_eq!(kinds("Points:\n- one"), vec![ViolationKind::FormattingCharacters]);
        assert_eq!(kinds("Steps:\n2. two"), vec![ViolationKind::FormattingCharacters]);
        assert_eq!(kinds("# Title"), vec![ViolationKind::FormattingCharacters]);
        assert!(kinds("A well-known phrase - used casually.").is_empty());
    }

    #[test]
    fn urls_are_leaks() {
        assert_eq!(
            kinds("See https://example.com for more."),
            vec![ViolationKind::ExternalInfoLeak]
        );
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_sentences("A. B. C. D. E.", 3), "A. B. C.");
        assert_eq!(truncate_sentences("A. B.", 3), "A. B.");
    }

    #[test]
    fn policy_defaults() {
        let p = EnforcementPolicy::default();
        assert_eq!(p.mode, EnforcementMode::LogOnly);
        assert_eq!(p.max_regenerations, 2);
    }
}
