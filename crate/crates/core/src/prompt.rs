//! Prompt strategies, in-context example selection and template rendering.
//!
//! Rendering is pure substitution into fixed template fixtures (embedded from
//! `templates/`, one per strategy, with `{{SENTENCE}}` and `{{EXAMPLES}}`
//! placeholders). Templates are never reflowed, so equal inputs always give
//! equal bytes and a stable content hash.

use crate::dataset::{DatasetSplit, LabeledExample};
use crate::schema::{LabelSchema, LabelSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("strategy {0} takes no in-context examples")]
    UnexpectedExamples(PromptStrategy),
    #[error("strategy {0} requires a nonempty example list")]
    MissingExamples(PromptStrategy),
    #[error("sentence must not be empty")]
    EmptySentence,
    #[error("unknown prompt strategy `{0}`")]
    UnknownStrategy(String),
    #[error("selection count must be at least 1")]
    ZeroCount,
    #[error("selection count {count} exceeds split size {split}")]
    CountExceedsSplit { count: usize, split: usize },
    #[error("label `{0}` never occurs in the training split")]
    UncoveredLabel(String),
    #[error("count {count} is too small to cover label `{label}`")]
    CoverageImpossible { count: usize, label: String },
    #[error("invalid selection spec `{0}`, expected method:count[:seed]")]
    BadSelectionSpec(String),
}

/// The five prompting strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStrategy {
    ZeroShot,
    ZeroShotCot,
    FewShot,
    FewShotCot,
    FewShotTot,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 5] = [
        PromptStrategy::ZeroShot,
        PromptStrategy::ZeroShotCot,
        PromptStrategy::FewShot,
        PromptStrategy::FewShotCot,
        PromptStrategy::FewShotTot,
    ];

    /// Whether the strategy carries an in-context examples block.
    pub fn is_few_shot(&self) -> bool {
        matches!(
            self,
            PromptStrategy::FewShot | PromptStrategy::FewShotCot | PromptStrategy::FewShotTot
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            PromptStrategy::ZeroShot => "zero_shot",
            PromptStrategy::ZeroShotCot => "zero_shot_cot",
            PromptStrategy::FewShot => "few_shot",
            PromptStrategy::FewShotCot => "few_shot_cot",
            PromptStrategy::FewShotTot => "few_shot_tot",
        }
    }

    /// The template fixture for this strategy, trailing newline stripped so
    /// every rendered prompt ends exactly on the `Emotions:` cue line.
    pub fn template(&self) -> &'static str {
        let raw = match self {
            PromptStrategy::ZeroShot => include_str!("../templates/zero_shot.txt"),
            PromptStrategy::ZeroShotCot => include_str!("../templates/zero_shot_cot.txt"),
            PromptStrategy::FewShot => include_str!("../templates/few_shot.txt"),
            PromptStrategy::FewShotCot => include_str!("../templates/few_shot_cot.txt"),
            PromptStrategy::FewShotTot => include_str!("../templates/few_shot_tot.txt"),
        };
        raw.trim_end_matches('\n')
    }
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PromptStrategy {
    type Err = PromptError;
    fn from_str(s: &str) -> Result<Self, PromptError> {
        match s.trim().to_lowercase().as_str() {
            "zero_shot" | "zero-shot" => Ok(PromptStrategy::ZeroShot),
            "zero_shot_cot" | "zero-shot-cot" => Ok(PromptStrategy::ZeroShotCot),
            "few_shot" | "few-shot" => Ok(PromptStrategy::FewShot),
            "few_shot_cot" | "few-shot-cot" => Ok(PromptStrategy::FewShotCot),
            "few_shot_tot" | "few-shot-tot" => Ok(PromptStrategy::FewShotTot),
            other => Err(PromptError::UnknownStrategy(other.to_string())),
        }
    }
}

/// How in-context examples are drawn from the training split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    /// Greedy label coverage: one pick per schema label, then fill in split order.
    PerEmotionCoverage,
    /// The first `count` examples of the split.
    FirstK,
    /// A seeded shuffle of the split, truncated to `count`.
    SeededRandom,
}

impl SelectionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionMethod::PerEmotionCoverage => "per_emotion_coverage",
            SelectionMethod::FirstK => "first_k",
            SelectionMethod::SeededRandom => "seeded_random",
        }
    }
}

impl FromStr for SelectionMethod {
    type Err = PromptError;
    fn from_str(s: &str) -> Result<Self, PromptError> {
        match s.trim().to_lowercase().as_str() {
            "per_emotion_coverage" => Ok(SelectionMethod::PerEmotionCoverage),
            "first_k" => Ok(SelectionMethod::FirstK),
            "seeded_random" => Ok(SelectionMethod::SeededRandom),
            other => Err(PromptError::BadSelectionSpec(other.to_string())),
        }
    }
}

/// A validated example-selection request, addressable as `method:count:seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSelection {
    pub method: SelectionMethod,
    pub count: usize,
    pub seed: u64,
}

impl ExampleSelection {
    pub fn new(method: SelectionMethod, count: usize, seed: u64) -> Result<Self, PromptError> {
        if count == 0 {
            return Err(PromptError::ZeroCount);
        }
        Ok(Self {
            method,
            count,
            seed,
        })
    }

    /// Parses `method:count[:seed]`; `default_seed` applies when the seed part
    /// is omitted.
    pub fn parse(spec: &str, default_seed: u64) -> Result<Self, PromptError> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(PromptError::BadSelectionSpec(spec.to_string()));
        }
        let method = parts[0].parse::<SelectionMethod>()?;
        let count = parts[1]
            .trim()
            .parse::<usize>()
            .map_err(|_| PromptError::BadSelectionSpec(spec.to_string()))?;
        let seed = match parts.get(2) {
            Some(raw) => raw
                .trim()
                .parse::<u64>()
                .map_err(|_| PromptError::BadSelectionSpec(spec.to_string()))?,
            None => default_seed,
        };
        Self::new(method, count, seed)
    }

    pub fn spec(&self) -> String {
        format!("{}:{}:{}", self.method.name(), self.count, self.seed)
    }
}

/// A prompt materialized to exact text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub strategy: PromptStrategy,
    pub example_ids: Vec<String>,
    /// Id of the sentence under classification, when rendered from a split.
    pub target_id: Option<String>,
    /// SHA-256 hex digest of `text`.
    pub content_hash: String,
}

/// Stable digest of prompt text; equal texts give equal hashes.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Renders one in-context example in the two-line `Sentence:` / `Emotions:`
/// form, labels title-cased and comma-space separated; the empty gold set
/// renders as `None`.
pub fn format_example(example: &LabeledExample, schema: &LabelSchema) -> String {
    format!(
        "Sentence: \"{}\"\nEmotions: {}",
        example.text,
        format_label_list(&example.gold, schema)
    )
}

/// The label list portion of an `Emotions:` line (`Anger, Fear` or `None`).
pub fn format_label_list(set: &LabelSet, schema: &LabelSchema) -> String {
    if set.is_none() {
        return "None".to_string();
    }
    set.positive_indices()
        .map(|i| schema.display_label(i))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Numbered examples block substituted for `{{EXAMPLES}}`.
fn format_examples_block(examples: &[LabeledExample], schema: &LabelSchema) -> String {
    examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            format!(
                "{}. Sentence: \"{}\"\n   Emotions: {}",
                i + 1,
                ex.text,
                format_label_list(&ex.gold, schema)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Substitutes the sentence (and examples, for few-shot strategies) into the
/// strategy's template.
pub fn render_prompt(
    strategy: PromptStrategy,
    examples: &[LabeledExample],
    sentence: &str,
    schema: &LabelSchema,
) -> Result<RenderedPrompt, PromptError> {
    render_prompt_for(strategy, examples, sentence, schema, None)
}

/// [`render_prompt`] with the target example's id recorded on the prompt.
pub fn render_prompt_for(
    strategy: PromptStrategy,
    examples: &[LabeledExample],
    sentence: &str,
    schema: &LabelSchema,
    target_id: Option<&str>,
) -> Result<RenderedPrompt, PromptError> {
    if sentence.trim().is_empty() {
        return Err(PromptError::EmptySentence);
    }
    if strategy.is_few_shot() && examples.is_empty() {
        return Err(PromptError::MissingExamples(strategy));
    }
    if !strategy.is_few_shot() && !examples.is_empty() {
        return Err(PromptError::UnexpectedExamples(strategy));
    }

    let mut text = strategy.template().replace("{{SENTENCE}}", sentence);
    if strategy.is_few_shot() {
        text = text.replace("{{EXAMPLES}}", &format_examples_block(examples, schema));
    }
    let content_hash = content_hash(&text);
    Ok(RenderedPrompt {
        text,
        strategy,
        example_ids: examples.iter().map(|e| e.id.clone()).collect(),
        target_id: target_id.map(|s| s.to_string()),
        content_hash,
    })
}

/// Selects in-context examples from `train` per the requested method.
///
/// All three methods are deterministic for a fixed `(train, selection)` pair,
/// and all three are prefix-stable: the list selected for count `k` is a
/// prefix of the list selected for count `k + 1` with the same method and
/// seed. Seeded selection uses a ChaCha8-driven Fisher-Yates shuffle so runs
/// replay identically across machines.
pub fn select_examples(
    train: &DatasetSplit,
    selection: &ExampleSelection,
) -> Result<Vec<LabeledExample>, PromptError> {
    if selection.count > train.len() {
        return Err(PromptError::CountExceedsSplit {
            count: selection.count,
            split: train.len(),
        });
    }
    let indices = match selection.method {
        SelectionMethod::FirstK => (0..selection.count).collect::<Vec<_>>(),
        SelectionMethod::SeededRandom => {
            let mut order = seeded_permutation(train.len(), selection.seed);
            order.truncate(selection.count);
            order
        }
        SelectionMethod::PerEmotionCoverage => {
            coverage_indices(train, selection.count)?
        }
    };
    Ok(indices
        .into_iter()
        .map(|i| train.examples[i].clone())
        .collect())
}

/// Fisher-Yates permutation of `0..n` driven by raw ChaCha8 output, pinned to
/// `next_u64() % range` draws so the order is a pure function of `(n, seed)`.
fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    order
}

/// Greedy coverage: for each schema label in order, the earliest unselected
/// example whose gold set contains it; remaining slots fill with the earliest
/// unselected examples.
fn coverage_indices(train: &DatasetSplit, count: usize) -> Result<Vec<usize>, PromptError> {
    let schema = &train.schema;
    let mut selected: Vec<usize> = Vec::with_capacity(count);
    for (label_idx, label) in schema.labels().iter().enumerate() {
        if !train.examples.iter().any(|e| e.gold.get(label_idx)) {
            return Err(PromptError::UncoveredLabel(label.clone()));
        }
        if selected.len() == count {
            // Out of slots; the label must already be covered incidentally.
            let covered = selected
                .iter()
                .any(|&i| train.examples[i].gold.get(label_idx));
            if !covered {
                return Err(PromptError::CoverageImpossible {
                    count,
                    label: label.clone(),
                });
            }
            continue;
        }
        let pick = train
            .examples
            .iter()
            .enumerate()
            .find(|(i, e)| e.gold.get(label_idx) && !selected.contains(i))
            .map(|(i, _)| i);
        // `None` means every example carrying this label is already selected.
        if let Some(i) = pick {
            selected.push(i);
        }
    }
    for i in 0..train.len() {
        if selected.len() == count {
            break;
        }
        if !selected.contains(&i) {
            selected.push(i);
        }
    }
    Ok(selected)
}
