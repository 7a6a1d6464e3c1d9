//! Golden-file tests: rendered prompts must byte-match frozen fixtures for
//! every strategy. Any template or formatting drift fails here first.

mod common;

use common::{canonical_examples, golden_prompt as golden, schema5, TARGET_SENTENCE};
use emoharness::{render_prompt, PromptStrategy};

fn render(strategy: PromptStrategy) -> String {
    let schema = schema5();
    let examples = if strategy.is_few_shot() {
        canonical_examples(&schema)
    } else {
        Vec::new()
    };
    render_prompt(strategy, &examples, TARGET_SENTENCE, &schema)
        .unwrap()
        .text
}

#[test]
fn all_five_strategies_byte_match_their_goldens() {
    for strategy in PromptStrategy::ALL {
        let rendered = render(strategy);
        let expected = golden(strategy);
        assert_eq!(
            rendered, expected,
            "rendered {strategy} prompt does not byte-match its golden"
        );
    }
}

#[test]
fn goldens_carry_the_none_instruction_where_it_belongs() {
    for strategy in [
        PromptStrategy::ZeroShot,
        PromptStrategy::ZeroShotCot,
        PromptStrategy::FewShot,
    ] {
        assert!(
            golden(strategy).contains("respond with \"None\""),
            "{strategy} golden should carry the None clause"
        );
    }
}

#[test]
fn tot_golden_contains_the_five_thought_scaffold() {
    let text = golden(PromptStrategy::FewShotTot);
    for n in 1..=5 {
        assert!(text.contains(&format!("Thought {n}:")), "missing Thought {n}");
    }
    assert!(text.contains("Final Emotions:"));
    assert!(text.contains("Tree of Thoughts approach"));
}

#[test]
fn few_shot_goldens_embed_all_six_examples_in_order() {
    for strategy in [
        PromptStrategy::FewShot,
        PromptStrategy::FewShotCot,
        PromptStrategy::FewShotTot,
    ] {
        let text = golden(strategy);
        let mut cursor = 0;
        for (i, needle) in [
            "1. Sentence: \"But not very happy.\"",
            "2. Sentence: \"They were dancing to Bolero\"",
            "3. Sentence: \"Yes, the Oklahoma city bombing.\"",
            "4. Sentence: \"5 year old me was scarred for life.\"",
            "5. Sentence: \"How stupid of him.\"",
            "6. Sentence: \"I turned around so I could see my back.\"",
        ]
        .iter()
        .enumerate()
        {
            let at = text[cursor..]
                .find(needle)
                .unwrap_or_else(|| panic!("{strategy}: example {} missing or out of order", i + 1));
            cursor += at + needle.len();
        }
        assert!(text.contains("Emotions: Anger, Fear, Sadness, Surprise"));
    }
}

#[test]
fn every_golden_ends_on_the_answer_cue() {
    for strategy in PromptStrategy::ALL {
        assert!(golden(strategy).ends_with("Emotions:"));
    }
}
