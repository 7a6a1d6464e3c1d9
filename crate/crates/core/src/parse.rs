//! Extraction of emotion label sets from free-text model responses.
//!
//! Parsing never fails hard: every outcome is a [`ParsedResponse`] with a
//! status, so batch scoring can proceed over arbitrary model output. Lines
//! are scanned from the end of the response because chain-of-thought style
//! prompts place the answer last.

use crate::schema::{LabelSchema, LabelSet};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

const FINAL_CUE: &str = "final emotions:";
const PLAIN_CUE: &str = "emotions:";

/// How unknown answer tokens are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParsePolicy {
    /// Any token that is not a schema label (or a lone `None`) fails the parse.
    Strict,
    /// Unknown tokens are dropped and surfaced in `unknown_tokens`.
    Lenient,
}

impl ParsePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ParsePolicy::Strict => "strict",
            ParsePolicy::Lenient => "lenient",
        }
    }
}

impl fmt::Display for ParsePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParsePolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_lowercase().as_str() {
            "strict" => Ok(ParsePolicy::Strict),
            "lenient" => Ok(ParsePolicy::Lenient),
            other => Err(format!("unknown parse policy `{other}`")),
        }
    }
}

/// Outcome quality of a single parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    /// Every answer token mapped to a schema label (or the answer was `None`).
    Clean,
    /// A decision was reached after dropping unknown tokens (lenient only).
    Recovered,
    /// No decision; labels fall back to the empty set.
    Failed,
}

/// A label-set decision extracted from raw model text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub labels: LabelSet,
    pub status: ParseStatus,
    /// Normalized tokens that matched no schema label.
    pub unknown_tokens: Vec<String>,
    /// The line the decision was read from; absent when the parse failed.
    pub source_line: Option<String>,
}

impl ParsedResponse {
    fn failed(schema: &LabelSchema, unknown_tokens: Vec<String>) -> Self {
        ParsedResponse {
            labels: LabelSet::empty(schema.len()),
            status: ParseStatus::Failed,
            unknown_tokens,
            source_line: None,
        }
    }
}

/// Locates the answer line: the last line starting with `Final Emotions:`,
/// else the last starting with `Emotions:`, else the last nonblank line.
/// Returns the full trimmed line and the payload after the cue (the whole
/// line when no cue matched).
fn candidate_line(raw: &str) -> Option<(String, String)> {
    let lines: Vec<&str> = raw.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    for cue in [FINAL_CUE, PLAIN_CUE] {
        if let Some(line) = lines
            .iter()
            .rev()
            .find(|l| l.to_lowercase().starts_with(cue))
        {
            // Cues are ASCII, so the case-folded prefix length is a valid
            // byte offset into the original line.
            let payload = line[cue.len()..].trim().to_string();
            return Some((line.to_string(), payload));
        }
    }
    lines
        .last()
        .map(|l| (l.to_string(), l.to_string()))
}

/// Strips surrounding whitespace, quote characters and periods, then
/// case-folds. Returns `None` for tokens that normalize to nothing.
fn normalize_token(raw: &str) -> Option<String> {
    let stripped = raw
        .trim_matches(|c: char| {
            c.is_whitespace() || matches!(c, '"' | '\'' | '.' | '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}')
        })
        .to_lowercase();
    if stripped.is_empty() {
        None
    } else {
        Some(stripped)
    }
}

/// Parses raw model output into a label set over `schema`.
///
/// The extraction rule: pick the answer line, split it on commas, normalize
/// each token, and match tokens against the schema. A lone `none` token is
/// the explicit empty answer. Matched labels always win over a stray `none`.
/// Parsing is a pure function of `(raw, schema, policy)`.
pub fn parse_emotions(raw: &str, schema: &LabelSchema, policy: ParsePolicy) -> ParsedResponse {
    let Some((line, payload)) = candidate_line(raw) else {
        return ParsedResponse::failed(schema, Vec::new());
    };

    let tokens: Vec<String> = payload.split(',').filter_map(normalize_token).collect();
    if tokens.is_empty() {
        return ParsedResponse::failed(schema, Vec::new());
    }

    let mut labels = LabelSet::empty(schema.len());
    let mut unknown = Vec::new();
    let mut none_tokens = 0usize;
    for token in &tokens {
        if let Some(idx) = schema.index_of(token) {
            labels.set(idx, true);
        } else if token == "none" {
            none_tokens += 1;
        } else {
            unknown.push(token.clone());
        }
    }

    let matched_any = !labels.is_none();
    // A `none` alongside real labels contradicts them; treat it as unknown.
    if none_tokens > 0 && matched_any {
        for _ in 0..none_tokens {
            unknown.push("none".to_string());
        }
        none_tokens = 0;
    }

    let decided = matched_any || none_tokens > 0;
    if !decided {
        return ParsedResponse::failed(schema, unknown);
    }
    if policy == ParsePolicy::Strict && !unknown.is_empty() {
        return ParsedResponse::failed(schema, unknown);
    }

    let status = if unknown.is_empty() {
        ParseStatus::Clean
    } else {
        ParseStatus::Recovered
    };
    ParsedResponse {
        labels,
        status,
        unknown_tokens: unknown,
        source_line: Some(line),
    }
}
