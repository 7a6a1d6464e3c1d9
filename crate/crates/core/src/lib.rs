//! Config-driven harness for multi-label emotion detection with LLM
//! prompting.
//!
//! The pipeline: load a CSV dataset split ([`dataset`]), select in-context
//! examples and render a prompt per eval sentence ([`prompt`]), dispatch the
//! prompts to a chat-completion provider with retries, caching and bounded
//! concurrency ([`client`]), extract label sets from the raw responses
//! ([`parse`]), and score them with per-label confusions and macro/micro F1
//! ([`metrics`]). The [`runner`] ties the stages together behind a single
//! declarative config file and persists every run as a replayable artifact.
//!
//! Determinism is a design goal throughout: prompt rendering is byte-exact
//! substitution, example selection is seeded and prefix-stable, responses are
//! cached by content hash, and a finished run replays byte-identically
//! against a warm cache.

pub mod client;
pub mod dataset;
pub mod metrics;
pub mod parse;
pub mod prompt;
pub mod runner;
pub mod schema;

pub use client::{
    cache_key, mock_answer, mock_emotions, AttemptError, CacheEntry, CacheError, Client,
    CompletionError, CompletionResult, DispatchStats, HttpChatProvider, MockLexicon, Provider,
    ProviderConfig, ProviderKind, ProviderResponse, ResponseCache, MOCK_LEXICON,
};
pub use dataset::{
    dataset_stats, known_split_size, load_dataset, load_dataset_as, token_count,
    validate_against_expected, CountCheck, DatasetError, DatasetSplit, LabeledExample, SplitName,
    TokenLengthHistogram,
};
pub use metrics::{
    compare_runs, confusion, f1_macro, f1_micro, f1_per_label, LabelConfusion, LabelDelta,
    LabelMetrics, LabelRates, MetricsError, MetricsReport, RunComparison,
};
pub use parse::{parse_emotions, ParsePolicy, ParseStatus, ParsedResponse};
pub use prompt::{
    content_hash, format_example, format_label_list, render_prompt, render_prompt_for,
    select_examples, ExampleSelection, PromptError, PromptStrategy, RenderedPrompt,
    SelectionMethod,
};
pub use runner::{
    compare_artifacts, emit_report, export_predictions, load_predictions, read_records,
    render_comparison_markdown, render_markdown, run_experiment, score_predictions, ConfigError,
    DatasetSection, DispatchSection, ExperimentConfig, PromptSection, RecordError, ReportFormat,
    RunArtifact, RunError, RunRecord, ScoreError, TimingSummary,
};
pub use schema::{LabelSchema, LabelSet, SchemaError};
