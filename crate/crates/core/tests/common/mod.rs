//! Fixtures shared across integration test binaries.
#![allow(dead_code)]

use emoharness::{LabelSchema, LabelSet, LabeledExample, ParsePolicy, ParseStatus, PromptStrategy};

pub const TARGET_SENTENCE: &str = "The package arrived two days early.";

pub fn schema5() -> LabelSchema {
    LabelSchema::new(["anger", "fear", "joy", "sadness", "surprise"]).unwrap()
}

/// The six canonical in-context examples used by the few-shot goldens.
pub fn canonical_examples(schema: &LabelSchema) -> Vec<LabeledExample> {
    let rows: [(&str, &[&str]); 6] = [
        ("But not very happy.", &["joy", "sadness"]),
        ("They were dancing to Bolero", &["joy", "sadness"]),
        (
            "Yes, the Oklahoma city bombing.",
            &["anger", "fear", "sadness", "surprise"],
        ),
        ("5 year old me was scarred for life.", &["fear", "sadness"]),
        ("How stupid of him.", &["anger"]),
        ("I turned around so I could see my back.", &["surprise"]),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, (text, labels))| LabeledExample {
            id: format!("ex{}", i + 1),
            text: text.to_string(),
            gold: LabelSet::from_labels(schema, labels.iter().copied()).unwrap(),
        })
        .collect()
}

/// Frozen rendering of each strategy over the canonical examples and target.
pub fn golden_prompt(strategy: PromptStrategy) -> &'static str {
    match strategy {
        PromptStrategy::ZeroShot => include_str!("../fixtures/prompts/zero_shot.golden.txt"),
        PromptStrategy::ZeroShotCot => {
            include_str!("../fixtures/prompts/zero_shot_cot.golden.txt")
        }
        PromptStrategy::FewShot => include_str!("../fixtures/prompts/few_shot.golden.txt"),
        PromptStrategy::FewShotCot => include_str!("../fixtures/prompts/few_shot_cot.golden.txt"),
        PromptStrategy::FewShotTot => include_str!("../fixtures/prompts/few_shot_tot.golden.txt"),
    }
}

/// One enumerated parser case.
pub struct ParserCase {
    pub name: &'static str,
    pub raw: &'static str,
    pub policy: ParsePolicy,
    pub expected_labels: &'static [&'static str],
    pub expected_status: ParseStatus,
}

use ParsePolicy::{Lenient, Strict};
use ParseStatus::{Clean, Failed, Recovered};

/// The frozen parser contract: raw output, policy, expected set and status.
pub const PARSER_CASES: &[ParserCase] = &[
    // The six canonical example answer lines.
    ParserCase {
        name: "answer_joy_sadness",
        raw: "Emotions: Joy, Sadness",
        policy: Strict,
        expected_labels: &["joy", "sadness"],
        expected_status: Clean,
    },
    ParserCase {
        name: "answer_four_labels_no_spaces",
        raw: "Emotions: Anger,Fear,Sadness,Surprise",
        policy: Strict,
        expected_labels: &["anger", "fear", "sadness", "surprise"],
        expected_status: Clean,
    },
    ParserCase {
        name: "answer_fear_sadness",
        raw: "Emotions: Fear, Sadness",
        policy: Strict,
        expected_labels: &["fear", "sadness"],
        expected_status: Clean,
    },
    ParserCase {
        name: "answer_single_anger",
        raw: "Emotions: Anger",
        policy: Strict,
        expected_labels: &["anger"],
        expected_status: Clean,
    },
    ParserCase {
        name: "answer_single_surprise",
        raw: "Emotions: Surprise",
        policy: Strict,
        expected_labels: &["surprise"],
        expected_status: Clean,
    },
    ParserCase {
        name: "explicit_none",
        raw: "Emotions: None",
        policy: Strict,
        expected_labels: &[],
        expected_status: Clean,
    },
    ParserCase {
        name: "none_lowercase_with_period",
        raw: "Emotions: none.",
        policy: Strict,
        expected_labels: &[],
        expected_status: Clean,
    },
    ParserCase {
        name: "lowercase_answer",
        raw: "emotions: joy, surprise",
        policy: Strict,
        expected_labels: &["joy", "surprise"],
        expected_status: Clean,
    },
    ParserCase {
        name: "quoted_labels_with_trailing_period",
        raw: "Emotions: \"Anger\", \"Fear\".",
        policy: Strict,
        expected_labels: &["anger", "fear"],
        expected_status: Clean,
    },
    ParserCase {
        name: "uppercase_labels",
        raw: "EMOTIONS: SADNESS",
        policy: Strict,
        expected_labels: &["sadness"],
        expected_status: Clean,
    },
    // Reasoning transcripts: the trailing answer line wins.
    ParserCase {
        name: "cot_preamble_then_answer",
        raw: "Reasoning: The words suggest loss and grief throughout.\n\nEmotions: Sadness",
        policy: Strict,
        expected_labels: &["sadness"],
        expected_status: Clean,
    },
    ParserCase {
        name: "tot_transcript_final_emotions_wins",
        raw: "Thought 1: Initial Impression: possibly Joy.\nThought 2: Word-Level Analysis: \"thrilled\" suggests Joy, maybe Surprise.\nThought 3: Contextual Considerations: an unexpected gift.\nThought 4: Alternative Interpretations: none stronger.\nThought 5: Synthesis: Joy with Surprise.\nFinal Emotions: Joy, Surprise",
        policy: Strict,
        expected_labels: &["joy", "surprise"],
        expected_status: Clean,
    },
    ParserCase {
        name: "final_emotions_overrides_earlier_emotions_line",
        raw: "Emotions: Fear\nOn reflection the surprise dominates.\nFinal Emotions: Surprise",
        policy: Strict,
        expected_labels: &["surprise"],
        expected_status: Clean,
    },
    ParserCase {
        name: "last_of_two_emotions_lines_wins",
        raw: "Emotions: Joy\nWait, the tone is darker than I thought.\nEmotions: Sadness",
        policy: Strict,
        expected_labels: &["sadness"],
        expected_status: Clean,
    },
    ParserCase {
        name: "bare_label_list_without_cue",
        raw: "Anger, Sadness",
        policy: Strict,
        expected_labels: &["anger", "sadness"],
        expected_status: Clean,
    },
    ParserCase {
        name: "answer_padded_with_blank_lines",
        raw: "\n\nEmotions: Fear\n\n\n",
        policy: Strict,
        expected_labels: &["fear"],
        expected_status: Clean,
    },
    ParserCase {
        name: "duplicate_labels_collapse",
        raw: "Emotions: Joy, joy, JOY",
        policy: Strict,
        expected_labels: &["joy"],
        expected_status: Clean,
    },
    // Recovery and failure.
    ParserCase {
        name: "unknown_token_recovered_leniently",
        raw: "Emotions: anger, excitement",
        policy: Lenient,
        expected_labels: &["anger"],
        expected_status: Recovered,
    },
    ParserCase {
        name: "unknown_token_fails_strictly",
        raw: "Emotions: anger, excitement",
        policy: Strict,
        expected_labels: &[],
        expected_status: Failed,
    },
    ParserCase {
        name: "synonym_is_not_mapped",
        raw: "Emotions: happiness",
        policy: Lenient,
        expected_labels: &[],
        expected_status: Failed,
    },
    ParserCase {
        name: "out_of_schema_emotion_word_dropped",
        raw: "Emotions: Disgust, Fear",
        policy: Lenient,
        expected_labels: &["fear"],
        expected_status: Recovered,
    },
    ParserCase {
        name: "none_mixed_with_label_recovers_to_label",
        raw: "Emotions: None, Joy",
        policy: Lenient,
        expected_labels: &["joy"],
        expected_status: Recovered,
    },
    ParserCase {
        name: "empty_response_fails",
        raw: "",
        policy: Lenient,
        expected_labels: &[],
        expected_status: Failed,
    },
    ParserCase {
        name: "whitespace_only_fails",
        raw: "  \n \n\t",
        policy: Strict,
        expected_labels: &[],
        expected_status: Failed,
    },
    ParserCase {
        name: "off_topic_prose_fails",
        raw: "I cannot determine the emotional content of this sentence.",
        policy: Lenient,
        expected_labels: &[],
        expected_status: Failed,
    },
    ParserCase {
        name: "cue_with_empty_payload_fails",
        raw: "Emotions:",
        policy: Lenient,
        expected_labels: &[],
        expected_status: Failed,
    },
];
