//! Per-label confusion matrices, F1 aggregates and cross-run comparison for
//! multi-label predictions.
//!
//! Conventions, applied uniformly and recorded in every report:
//! - one-vs-rest counting per label;
//! - precision/recall/F1 are 0 whenever their denominator is 0;
//! - macro-F1 averages over *all* schema labels, including labels with zero
//!   gold positives;
//! - row rates (tp_rate/fn_rate over gold positives, tn_rate/fp_rate over
//!   gold negatives) are absent — not 0/0 — when the row is empty.

use crate::schema::{LabelSchema, LabelSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold has {gold} examples but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("label set width {found} does not match schema width {expected} at example {index}")]
    WidthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot score an empty example list")]
    EmptyInput,
    #[error("label `{0}` is not in the schema")]
    UnknownLabel(String),
    #[error("reports cover different schemas: [{a}] vs [{b}]")]
    SchemaMismatch { a: String, b: String },
}

/// One-vs-rest counts for a single label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelConfusion {
    pub label: String,
    pub tp: u64,
    pub fp: u64,
    pub r#fn: u64,
    pub tn: u64,
}

impl LabelConfusion {
    /// Gold positives for this label.
    pub fn positives(&self) -> u64 {
        self.tp + self.r#fn
    }

    /// Gold negatives for this label.
    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.r#fn + self.tn
    }

    /// Row-normalized shares; `None` for rows with no examples.
    pub fn rates(&self) -> LabelRates {
        let pos = self.positives();
        let neg = self.negatives();
        LabelRates {
            tp_rate: (pos > 0).then(|| self.tp as f64 / pos as f64),
            fn_rate: (pos > 0).then(|| self.r#fn as f64 / pos as f64),
            tn_rate: (neg > 0).then(|| self.tn as f64 / neg as f64),
            fp_rate: (neg > 0).then(|| self.fp as f64 / neg as f64),
        }
    }
}

/// Fractions of each true-class row of a [`LabelConfusion`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelRates {
    pub tp_rate: Option<f64>,
    pub fn_rate: Option<f64>,
    pub tn_rate: Option<f64>,
    pub fp_rate: Option<f64>,
}

/// Confusion, rates and threshold scores for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub confusion: LabelConfusion,
    pub rates: LabelRates,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// The full quantitative summary of one scored run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// One entry per schema label, in schema order.
    pub per_label: Vec<LabelMetrics>,
    pub f1_macro: f64,
    pub f1_micro: f64,
    pub n_examples: usize,
    pub parse_failure_count: usize,
}

fn check_aligned(
    gold: &[LabelSet],
    pred: &[LabelSet],
    schema: &LabelSchema,
) -> Result<(), MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    for (index, (g, p)) in gold.iter().zip(pred.iter()).enumerate() {
        for set in [g, p] {
            if set.len() != schema.len() {
                return Err(MetricsError::WidthMismatch {
                    index,
                    expected: schema.len(),
                    found: set.len(),
                });
            }
        }
    }
    Ok(())
}

fn confusion_at(gold: &[LabelSet], pred: &[LabelSet], label: &str, idx: usize) -> LabelConfusion {
    let mut c = LabelConfusion {
        label: label.to_string(),
        tp: 0,
        fp: 0,
        r#fn: 0,
        tn: 0,
    };
    for (g, p) in gold.iter().zip(pred.iter()) {
        match (g.get(idx), p.get(idx)) {
            (true, true) => c.tp += 1,
            (true, false) => c.r#fn += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

/// One-vs-rest counts for `label` over aligned gold/pred lists.
pub fn confusion(
    gold: &[LabelSet],
    pred: &[LabelSet],
    schema: &LabelSchema,
    label: &str,
) -> Result<LabelConfusion, MetricsError> {
    check_aligned(gold, pred, schema)?;
    let idx = schema
        .index_of(label)
        .ok_or_else(|| MetricsError::UnknownLabel(label.to_string()))?;
    Ok(confusion_at(gold, pred, schema.labels()[idx].as_str(), idx))
}

/// Precision, recall and F1 from one confusion, zero-division → 0.
pub fn f1_per_label(c: &LabelConfusion) -> (f64, f64, f64) {
    let precision = ratio_or_zero(c.tp, c.tp + c.fp);
    let recall = ratio_or_zero(c.tp, c.tp + c.r#fn);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

fn ratio_or_zero(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Unweighted mean of per-label F1 over the whole schema.
pub fn f1_macro(
    gold: &[LabelSet],
    pred: &[LabelSet],
    schema: &LabelSchema,
) -> Result<f64, MetricsError> {
    if gold.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    check_aligned(gold, pred, schema)?;
    let sum: f64 = schema
        .labels()
        .iter()
        .enumerate()
        .map(|(idx, label)| f1_per_label(&confusion_at(gold, pred, label, idx)).2)
        .sum();
    Ok(sum / schema.len() as f64)
}

/// F1 from tp/fp/fn pooled over all labels jointly.
pub fn f1_micro(
    gold: &[LabelSet],
    pred: &[LabelSet],
    schema: &LabelSchema,
) -> Result<f64, MetricsError> {
    if gold.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    check_aligned(gold, pred, schema)?;
    let (mut tp, mut fp, mut fnc) = (0u64, 0u64, 0u64);
    for (idx, label) in schema.labels().iter().enumerate() {
        let c = confusion_at(gold, pred, label, idx);
        tp += c.tp;
        fp += c.fp;
        fnc += c.r#fn;
    }
    Ok(ratio_or_zero(2 * tp, 2 * tp + fp + fnc))
}

impl MetricsReport {
    /// Scores aligned gold/pred lists over `schema`.
    pub fn compute(
        gold: &[LabelSet],
        pred: &[LabelSet],
        schema: &LabelSchema,
        parse_failure_count: usize,
    ) -> Result<MetricsReport, MetricsError> {
        if gold.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        check_aligned(gold, pred, schema)?;
        let per_label: Vec<LabelMetrics> = schema
            .labels()
            .iter()
            .enumerate()
            .map(|(idx, label)| {
                let confusion = confusion_at(gold, pred, label, idx);
                let rates = confusion.rates();
                let (precision, recall, f1) = f1_per_label(&confusion);
                LabelMetrics {
                    confusion,
                    rates,
                    precision,
                    recall,
                    f1,
                }
            })
            .collect();
        let f1_macro = per_label.iter().map(|m| m.f1).sum::<f64>() / per_label.len() as f64;
        let f1_micro = f1_micro(gold, pred, schema)?;
        Ok(MetricsReport {
            per_label,
            f1_macro,
            f1_micro,
            n_examples: gold.len(),
            parse_failure_count,
        })
    }

    /// The schema label list this report was computed over, in order.
    pub fn labels(&self) -> Vec<&str> {
        self.per_label
            .iter()
            .map(|m| m.confusion.label.as_str())
            .collect()
    }

    /// Per-label rows: `label,tp,fp,fn,tn,tp_rate,fn_rate,tn_rate,fp_rate,precision,recall,f1`.
    /// Absent rates render as empty cells.
    pub fn per_label_csv(&self) -> String {
        let mut out =
            String::from("label,tp,fp,fn,tn,tp_rate,fn_rate,tn_rate,fp_rate,precision,recall,f1\n");
        for m in &self.per_label {
            let c = &m.confusion;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.label,
                c.tp,
                c.fp,
                c.r#fn,
                c.tn,
                rate_cell(m.rates.tp_rate),
                rate_cell(m.rates.fn_rate),
                rate_cell(m.rates.tn_rate),
                rate_cell(m.rates.fp_rate),
                m.precision,
                m.recall,
                m.f1
            ));
        }
        out
    }

    /// Summary row: `f1_macro,f1_micro,n_examples,parse_failures`.
    pub fn summary_csv(&self) -> String {
        format!(
            "f1_macro,f1_micro,n_examples,parse_failures\n{},{},{},{}\n",
            self.f1_macro, self.f1_micro, self.n_examples, self.parse_failure_count
        )
    }
}

fn rate_cell(rate: Option<f64>) -> String {
    rate.map(|r| r.to_string()).unwrap_or_default()
}

/// Per-label F1 difference between two runs over the same schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDelta {
    pub label: String,
    pub f1_a: f64,
    pub f1_b: f64,
    /// `f1_a - f1_b`.
    pub delta: f64,
}

/// Output of [`compare_runs`]: schema-ordered per-label deltas plus aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunComparison {
    pub per_label: Vec<LabelDelta>,
    pub f1_macro_delta: f64,
    pub f1_micro_delta: f64,
}

/// Differences `a − b`, per label and aggregate. Errors unless both reports
/// cover the same ordered label list.
pub fn compare_runs(a: &MetricsReport, b: &MetricsReport) -> Result<RunComparison, MetricsError> {
    if a.labels() != b.labels() {
        return Err(MetricsError::SchemaMismatch {
            a: a.labels().join(", "),
            b: b.labels().join(", "),
        });
    }
    let per_label = a
        .per_label
        .iter()
        .zip(b.per_label.iter())
        .map(|(ma, mb)| LabelDelta {
            label: ma.confusion.label.clone(),
            f1_a: ma.f1,
            f1_b: mb.f1,
            delta: ma.f1 - mb.f1,
        })
        .collect();
    Ok(RunComparison {
        per_label,
        f1_macro_delta: a.f1_macro - b.f1_macro,
        f1_micro_delta: a.f1_micro - b.f1_micro,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema5() -> LabelSchema {
        LabelSchema::new(["anger", "fear", "joy", "sadness", "surprise"]).unwrap()
    }

    fn set(bits: &[u8]) -> LabelSet {
        LabelSet::from_bits(bits.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn perfect_prediction_scores_one_everywhere() {
        let schema = schema5();
        let gold = vec![
            set(&[1, 0, 0, 1, 0]),
            set(&[0, 1, 0, 0, 0]),
            set(&[0, 0, 1, 0, 1]),
            set(&[1, 1, 1, 1, 1]),
        ];
        let report = MetricsReport::compute(&gold, &gold, &schema, 0).unwrap();
        assert_eq!(report.f1_macro, 1.0);
        assert_eq!(report.f1_micro, 1.0);
        for m in &report.per_label {
            assert_eq!(m.f1, 1.0);
            assert_eq!(m.confusion.fp, 0);
            assert_eq!(m.confusion.r#fn, 0);
        }
    }

    #[test]
    fn total_confusion_counts_per_spec_shape() {
        let schema = LabelSchema::new(["anger"]).unwrap();
        let gold = vec![set(&[1]), set(&[0])];
        let pred = vec![set(&[0]), set(&[1])];
        let c = confusion(&gold, &pred, &schema, "anger").unwrap();
        assert_eq!((c.tp, c.r#fn, c.fp, c.tn), (0, 1, 1, 0));
        assert_eq!(f1_macro(&gold, &pred, &schema).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_f1_matches() {
        // tp=3, fp=1, fn=2: precision 3/4, recall 3/5, f1 = 6/9 = 2/3.
        let c = LabelConfusion {
            label: "anger".into(),
            tp: 3,
            fp: 1,
            r#fn: 2,
            tn: 4,
        };
        let (p, r, f1) = f1_per_label(&c);
        assert!((p - 0.75).abs() < 1e-12);
        assert!((r - 0.6).abs() < 1e-12);
        assert!((f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_division_yields_zero() {
        let c = LabelConfusion {
            label: "joy".into(),
            tp: 0,
            fp: 0,
            r#fn: 0,
            tn: 9,
        };
        let (p, r, f1) = f1_per_label(&c);
        assert_eq!((p, r, f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rates_are_row_shares_and_absent_rows_are_none() {
        let c = LabelConfusion {
            label: "fear".into(),
            tp: 7,
            r#fn: 1,
            fp: 3,
            tn: 7,
        };
        let rates = c.rates();
        assert!((rates.tp_rate.unwrap() - 0.875).abs() < 1e-12);
        assert!((rates.tp_rate.unwrap() + rates.fn_rate.unwrap() - 1.0).abs() < 1e-12);
        assert!((rates.tn_rate.unwrap() + rates.fp_rate.unwrap() - 1.0).abs() < 1e-12);

        let empty_pos = LabelConfusion {
            label: "joy".into(),
            tp: 0,
            r#fn: 0,
            fp: 2,
            tn: 5,
        };
        let rates = empty_pos.rates();
        assert!(rates.tp_rate.is_none());
        assert!(rates.fn_rate.is_none());
        assert!(rates.fp_rate.is_some());
    }

    #[test]
    fn single_label_schema_micro_equals_label_f1() {
        let schema = LabelSchema::new(["joy"]).unwrap();
        let gold = vec![set(&[1]), set(&[1]), set(&[0]), set(&[0])];
        let pred = vec![set(&[1]), set(&[0]), set(&[1]), set(&[0])];
        let c = confusion(&gold, &pred, &schema, "joy").unwrap();
        let (_, _, f1) = f1_per_label(&c);
        assert!((f1_micro(&gold, &pred, &schema).unwrap() - f1).abs() < 1e-15);
    }

    #[test]
    fn macro_counts_labels_with_no_gold_positives() {
        let schema = LabelSchema::new(["anger", "joy"]).unwrap();
        // joy never occurs and is never predicted: f1(joy)=0 by convention.
        let gold = vec![set(&[1, 0]), set(&[1, 0])];
        let report = MetricsReport::compute(&gold, &gold, &schema, 0).unwrap();
        assert_eq!(report.per_label[0].f1, 1.0);
        assert_eq!(report.per_label[1].f1, 0.0);
        assert!((report.f1_macro - 0.5).abs() < 1e-15);
        assert_eq!(report.f1_micro, 1.0);
    }

    #[test]
    fn permutation_of_example_pairs_leaves_metrics_unchanged() {
        let schema = schema5();
        let gold = vec![
            set(&[1, 0, 1, 0, 0]),
            set(&[0, 1, 0, 0, 1]),
            set(&[0, 0, 0, 0, 0]),
            set(&[1, 1, 1, 1, 1]),
            set(&[0, 0, 1, 1, 0]),
        ];
        let pred = vec![
            set(&[1, 0, 0, 0, 0]),
            set(&[0, 1, 0, 1, 1]),
            set(&[0, 0, 1, 0, 0]),
            set(&[1, 1, 0, 1, 1]),
            set(&[0, 0, 1, 1, 0]),
        ];
        let base = MetricsReport::compute(&gold, &pred, &schema, 0).unwrap();
        let order = [3usize, 0, 4, 2, 1];
        let gold_shuffled: Vec<_> = order.iter().map(|&i| gold[i].clone()).collect();
        let pred_shuffled: Vec<_> = order.iter().map(|&i| pred[i].clone()).collect();
        let shuffled = MetricsReport::compute(&gold_shuffled, &pred_shuffled, &schema, 0).unwrap();
        assert_eq!(base, shuffled);
    }

    #[test]
    fn adding_a_perfect_example_never_lowers_micro() {
        let schema = schema5();
        let mut gold = vec![set(&[1, 0, 1, 0, 0]), set(&[0, 1, 0, 0, 1])];
        let mut pred = vec![set(&[1, 1, 0, 0, 0]), set(&[0, 1, 0, 1, 1])];
        let before = f1_micro(&gold, &pred, &schema).unwrap();
        gold.push(set(&[1, 1, 1, 1, 1]));
        pred.push(set(&[1, 1, 1, 1, 1]));
        let after = f1_micro(&gold, &pred, &schema).unwrap();
        assert!(after >= before);
    }

    #[test]
    fn empty_input_and_misalignment_are_rejected() {
        let schema = schema5();
        assert_eq!(
            f1_macro(&[], &[], &schema).unwrap_err(),
            MetricsError::EmptyInput
        );
        let gold = vec![set(&[1, 0, 0, 0, 0])];
        assert!(matches!(
            f1_macro(&gold, &[], &schema).unwrap_err(),
            MetricsError::LengthMismatch { .. }
        ));
        let narrow = vec![set(&[1, 0])];
        assert!(matches!(
            f1_macro(&gold, &narrow, &schema).unwrap_err(),
            MetricsError::WidthMismatch { .. }
        ));
    }

    #[test]
    fn comparing_a_report_with_itself_gives_zero_deltas() {
        let schema = schema5();
        let gold = vec![set(&[1, 0, 1, 0, 0]), set(&[0, 1, 0, 1, 1])];
        let pred = vec![set(&[1, 0, 0, 0, 0]), set(&[0, 1, 0, 1, 0])];
        let report = MetricsReport::compute(&gold, &pred, &schema, 0).unwrap();
        let cmp = compare_runs(&report, &report).unwrap();
        assert!(cmp.per_label.iter().all(|d| d.delta == 0.0));
        assert_eq!(cmp.f1_macro_delta, 0.0);
    }

    #[test]
    fn comparing_across_schemas_errors() {
        let a = MetricsReport::compute(
            &[set(&[1])],
            &[set(&[1])],
            &LabelSchema::new(["anger"]).unwrap(),
            0,
        )
        .unwrap();
        let b = MetricsReport::compute(
            &[set(&[1])],
            &[set(&[1])],
            &LabelSchema::new(["joy"]).unwrap(),
            0,
        )
        .unwrap();
        assert!(matches!(
            compare_runs(&a, &b).unwrap_err(),
            MetricsError::SchemaMismatch { .. }
        ));
    }

    #[test]
    fn csv_headers_match_the_documented_shape() {
        let schema = schema5();
        let gold = vec![set(&[1, 0, 0, 0, 0])];
        let report = MetricsReport::compute(&gold, &gold, &schema, 2).unwrap();
        assert!(report.per_label_csv().starts_with(
            "label,tp,fp,fn,tn,tp_rate,fn_rate,tn_rate,fp_rate,precision,recall,f1\n"
        ));
        assert!(report
            .summary_csv()
            .starts_with("f1_macro,f1_micro,n_examples,parse_failures\n"));
        assert!(report.summary_csv().contains(",2\n"));
        assert_eq!(report.per_label_csv().lines().count(), 6);
    }
}
