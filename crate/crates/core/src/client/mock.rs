//! Deterministic offline provider driven by a fixed trigger-word lexicon.
//!
//! The mock reads the *last* `Sentence:` block of the prompt (the target
//! sentence; in-context examples precede it by template construction),
//! matches whole words against the lexicon, and answers in the compliant
//! one-line format. Same sentence, same output — always. Call and in-flight
//! counters make the mock usable as a dispatch probe in tests.

use super::{AttemptError, Provider, ProviderResponse};
use crate::prompt::RenderedPrompt;
use async_trait::async_trait;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

/// Trigger word → emotion word, matched case-insensitively on whole words.
pub const MOCK_LEXICON: &[(&str, &str)] = &[
    ("furious", "anger"),
    ("angry", "anger"),
    ("terrified", "fear"),
    ("afraid", "fear"),
    ("delighted", "joy"),
    ("happy", "joy"),
    ("grieving", "sadness"),
    ("sad", "sadness"),
    ("astonished", "surprise"),
    ("shocked", "surprise"),
];

/// Emotion order used for the mock's answers.
const EMOTION_ORDER: [&str; 5] = ["anger", "fear", "joy", "sadness", "surprise"];

/// Emotions the lexicon assigns to a sentence, lowercase, in canonical order.
pub fn mock_emotions(sentence: &str) -> Vec<&'static str> {
    let words: Vec<String> = sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect();
    EMOTION_ORDER
        .iter()
        .filter(|&&emotion| {
            MOCK_LEXICON
                .iter()
                .any(|&(trigger, e)| e == emotion && words.iter().any(|w| w == trigger))
        })
        .copied()
        .collect()
}

/// The one-line answer the mock gives for a target sentence.
pub fn mock_answer(sentence: &str) -> String {
    let emotions = mock_emotions(sentence);
    if emotions.is_empty() {
        "Emotions: None".to_string()
    } else {
        let list: Vec<String> = emotions
            .iter()
            .map(|e| crate::schema::title_case(e))
            .collect();
        format!("Emotions: {}", list.join(", "))
    }
}

/// Extracts the target sentence: the text after the last `Sentence:` marker,
/// up to the next template cue line.
fn target_sentence(prompt_text: &str) -> Option<&str> {
    let start = prompt_text.rfind("Sentence:")? + "Sentence:".len();
    let rest = &prompt_text[start..];
    let mut end = rest.len();
    for cue in ["\nEmotions:", "\nReasoning:", "\nThought", "\nFinal Emotions:"] {
        if let Some(pos) = rest.find(cue) {
            end = end.min(pos);
        }
    }
    Some(rest[..end].trim())
}

/// Offline provider answering from [`MOCK_LEXICON`].
#[derive(Debug, Default)]
pub struct MockLexicon {
    latency: Option<Duration>,
    calls: AtomicU64,
    in_flight: AtomicU64,
    peak_in_flight: AtomicU64,
}

impl MockLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// A mock that holds each request open for `latency`, making concurrent
    /// dispatch observable.
    pub fn with_latency(latency: Duration) -> Self {
        MockLexicon {
            latency: Some(latency),
            ..Self::default()
        }
    }

    /// Total completed provider invocations.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// Highest number of simultaneously open requests observed.
    pub fn peak_in_flight(&self) -> u64 {
        self.peak_in_flight.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl Provider for MockLexicon {
    fn name(&self) -> &'static str {
        "mock_lexicon"
    }

    async fn complete_once(&self, prompt: &RenderedPrompt) -> Result<ProviderResponse, AttemptError> {
        let open = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak_in_flight.fetch_max(open, Ordering::SeqCst);
        if let Some(latency) = self.latency {
            tokio::time::sleep(latency).await;
        }
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        self.calls.fetch_add(1, Ordering::SeqCst);

        let sentence = target_sentence(&prompt.text).ok_or_else(|| AttemptError {
            message: "prompt contains no Sentence: block".to_string(),
            transient: false,
        })?;
        Ok(ProviderResponse {
            raw_text: mock_answer(sentence),
            meta: BTreeMap::new(),
        })
    }
}
