//! Prompt construction and four-section response parsing.
//!
//! The prompt template is a golden artifact stored at
//! `templates/cot_prompt.txt` and emitted byte-for-byte, oddities included:
//! the history block closes with a second `<history>` rather than
//! `</history>`, and "assitant" is spelled that way on purpose. Tests pin the
//! rendered output against a checked-in golden file.
//!
//! Responses are expected to carry four labeled sections — observation,
//! reasoning, action, summary — which the parser extracts case-insensitively,
//! with or without a trailing colon, in any order.

use thiserror::Error;

use crate::action::{parse_action, Action, MalformedAction};
use crate::geometry::UiElement;

const PROMPT_TEMPLATE: &str = include_str!("../templates/cot_prompt.txt");

const PLACEHOLDERS: [&str; 4] = ["{image_path}", "{task}", "{elements}", "{history}"];

/// Everything needed to render one step's prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptInput {
    /// Opaque reference to the screenshot, substituted into the `<img>` tag.
    pub image_ref: String,
    pub task: String,
    pub elements: Vec<UiElement>,
    /// Prior summary texts, oldest first. Rendered as the literal `None`
    /// when empty.
    pub history: Vec<String>,
}

/// A parsed four-section model response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CotResponse {
    pub observation: String,
    pub reasoning: String,
    /// The action section verbatim (trimmed); `action` is its parsed form.
    pub action_text: String,
    pub summary: String,
    pub action: Action,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CotParseError {
    #[error("missing section <{0}>")]
    MissingSection(&'static str),
    #[error("empty section <{0}>")]
    EmptySection(&'static str),
    #[error(transparent)]
    MalformedAction(#[from] MalformedAction),
}

/// Renders the prompt template with the given inputs. Deterministic:
/// identical inputs produce identical bytes.
pub fn build_prompt(input: &PromptInput) -> String {
    let elements = if input.elements.is_empty() {
        " ".to_string()
    } else {
        let lines = input
            .elements
            .iter()
            .map(element_line)
            .collect::<Vec<_>>()
            .join("\n");
        format!(" {lines} ")
    };
    let history = if input.history.is_empty() {
        "None".to_string()
    } else {
        input.history.join("\n")
    };
    let values = [
        input.image_ref.as_str(),
        input.task.as_str(),
        elements.as_str(),
        history.as_str(),
    ];

    let mut out = String::with_capacity(PROMPT_TEMPLATE.len() + 256);
    let mut rest = PROMPT_TEMPLATE;
    for (placeholder, value) in PLACEHOLDERS.iter().zip(values) {
        let at = rest
            .find(placeholder)
            .expect("prompt template carries every placeholder in order");
        out.push_str(&rest[..at]);
        out.push_str(value);
        rest = &rest[at + placeholder.len()..];
    }
    out.push_str(rest);
    out
}

/// One `<list>` line: `text@[left,top,right,bottom]`.
pub fn element_line(e: &UiElement) -> String {
    format!(
        "{}@[{},{},{},{}]",
        e.text, e.bounds.left, e.bounds.top, e.bounds.right, e.bounds.bottom
    )
}

/// Serializes a response using the template's section labels. Inverse of
/// [`parse_response`] for section texts free of label tags.
pub fn render_response(r: &CotResponse) -> String {
    format!(
        "<observation>: {}\n<Reasoning>: {}\n<Action>: {}\n<Summary>: {}\n",
        r.observation, r.reasoning, r.action_text, r.summary
    )
}

const SECTION_NAMES: [&str; 4] = ["observation", "reasoning", "action", "summary"];

#[derive(Debug, Clone, Copy)]
struct LabelHit {
    section: usize,
    start: usize,
    content_start: usize,
}

fn find_label_hits(text: &str) -> Vec<LabelHit> {
    // Labels are pure ASCII, so an ASCII case fold keeps byte offsets aligned
    // with the original text.
    let folded = text.to_ascii_lowercase();
    let mut hits = Vec::new();
    for (section, name) in SECTION_NAMES.iter().enumerate() {
        let tag = format!("<{name}>");
        let mut from = 0;
        while let Some(found) = folded[from..].find(&tag) {
            let start = from + found;
            let mut content_start = start + tag.len();
            if folded[content_start..].starts_with(':') {
                content_start += 1;
            }
            hits.push(LabelHit {
                section,
                start,
                content_start,
            });
            from = start + tag.len();
        }
    }
    hits.sort_by_key(|h| h.start);
    hits
}

/// Extracts the four sections and parses the action. Section labels may
/// appear in any order; each section runs until the next label or the end of
/// the text. A bare `Finish` (any case) in the action section is normalized
/// to [`Action::TaskFinish`].
pub fn parse_response(text: &str) -> Result<CotResponse, CotParseError> {
    let hits = find_label_hits(text);
    let mut sections: [Option<String>; 4] = [None, None, None, None];
    for (i, hit) in hits.iter().enumerate() {
        if sections[hit.section].is_some() {
            continue; // first occurrence of a label wins
        }
        let end = hits
            .get(i + 1)
            .map(|next| next.start)
            .unwrap_or(text.len());
        sections[hit.section] = Some(text[hit.content_start..end].trim().to_string());
    }

    let mut take = |idx: usize| -> Result<String, CotParseError> {
        let name = SECTION_NAMES[idx];
        let value = sections[idx]
            .take()
            .ok_or(CotParseError::MissingSection(name))?;
        if value.is_empty() {
            return Err(CotParseError::EmptySection(name));
        }
        Ok(value)
    };

    let observation = take(0)?;
    let reasoning = take(1)?;
    let action_text = take(2)?;
    let summary = take(3)?;

    let action = if action_text.eq_ignore_ascii_case("finish") {
        Action::TaskFinish
    } else {
        parse_action(&action_text)?
    };

    Ok(CotResponse {
        observation,
        reasoning,
        action_text,
        summary,
        action,
    })
}
