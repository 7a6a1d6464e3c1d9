//! Human-readable report emission for run artifacts.
//!
//! Markdown reports carry a run summary, per-label scores, and one confusion
//! table per label showing counts with row-normalized integer percentages.
//! CSV reports reuse the metrics module's two canonical tables.

use super::{RunArtifact, RunError};
use crate::metrics::{compare_runs, LabelMetrics, MetricsError, RunComparison};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format `{other}`, expected markdown or csv")),
        }
    }
}

/// `count (pct%)`, or the bare count when the row has no examples.
fn cell(count: u64, rate: Option<f64>) -> String {
    match rate {
        Some(rate) => format!("{} ({}%)", count, (rate * 100.0).round() as i64),
        None => count.to_string(),
    }
}

fn confusion_table(out: &mut String, m: &LabelMetrics) {
    let c = &m.confusion;
    let title = crate::schema::title_case(&c.label);
    writeln!(out, "### Confusion: {title}\n").unwrap();
    writeln!(out, "| gold \\ predicted | positive | negative |").unwrap();
    writeln!(out, "|---|---|---|").unwrap();
    writeln!(
        out,
        "| positive | {} | {} |",
        cell(c.tp, m.rates.tp_rate),
        cell(c.r#fn, m.rates.fn_rate)
    )
    .unwrap();
    writeln!(
        out,
        "| negative | {} | {} |",
        cell(c.fp, m.rates.fp_rate),
        cell(c.tn, m.rates.tn_rate)
    )
    .unwrap();
    out.push('\n');
}

/// Full markdown report for one artifact.
pub fn render_markdown(artifact: &RunArtifact) -> String {
    let config = &artifact.config;
    let metrics = &artifact.metrics;
    let mut out = String::new();
    writeln!(out, "# Run `{}`\n", config.run_id).unwrap();
    writeln!(
        out,
        "- strategy: `{}`{}",
        config.prompt.strategy,
        config
            .prompt
            .selection
            .as_deref()
            .map(|s| format!(" (selection `{s}`)"))
            .unwrap_or_default()
    )
    .unwrap();
    writeln!(
        out,
        "- provider: `{}` (model `{}`)",
        config.provider.kind_name(),
        config.provider.cache_model_name()
    )
    .unwrap();
    writeln!(out, "- parse policy: `{}`", config.prompt.parse_policy).unwrap();
    writeln!(
        out,
        "- eval examples: {} | parse failures: {} | provider calls: {} | cache hits: {}\n",
        metrics.n_examples,
        metrics.parse_failure_count,
        artifact.timing.provider_calls,
        artifact.timing.cache_hits
    )
    .unwrap();

    writeln!(out, "## Summary\n").unwrap();
    writeln!(out, "| f1_macro | f1_micro | n_examples | parse_failures |").unwrap();
    writeln!(out, "|---|---|---|---|").unwrap();
    writeln!(
        out,
        "| {:.4} | {:.4} | {} | {} |\n",
        metrics.f1_macro, metrics.f1_micro, metrics.n_examples, metrics.parse_failure_count
    )
    .unwrap();

    writeln!(out, "## Per-label scores\n").unwrap();
    writeln!(out, "| label | precision | recall | f1 |").unwrap();
    writeln!(out, "|---|---|---|---|").unwrap();
    for m in &metrics.per_label {
        writeln!(
            out,
            "| {} | {:.4} | {:.4} | {:.4} |",
            m.confusion.label, m.precision, m.recall, m.f1
        )
        .unwrap();
    }
    out.push('\n');

    writeln!(out, "## Confusion matrices\n").unwrap();
    for m in &metrics.per_label {
        confusion_table(&mut out, m);
    }
    out
}

/// Writes report files into the artifact directory; returns the paths written.
pub fn emit_report(artifact: &RunArtifact, format: ReportFormat) -> Result<Vec<PathBuf>, RunError> {
    let write = |name: &str, content: &str| -> Result<PathBuf, RunError> {
        let path = artifact.dir.join(name);
        std::fs::write(&path, content).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    match format {
        ReportFormat::Markdown => Ok(vec![write("report.md", &render_markdown(artifact))?]),
        ReportFormat::Csv => Ok(vec![
            write("per_label.csv", &artifact.metrics.per_label_csv())?,
            write("summary.csv", &artifact.metrics.summary_csv())?,
        ]),
    }
}

/// Per-emotion F1 deltas between two artifacts over the same schema.
pub fn compare_artifacts(a: &RunArtifact, b: &RunArtifact) -> Result<RunComparison, MetricsError> {
    compare_runs(&a.metrics, &b.metrics)
}

/// Markdown table for a comparison; `name_a`/`name_b` caption the columns.
pub fn render_comparison_markdown(
    comparison: &RunComparison,
    name_a: &str,
    name_b: &str,
) -> String {
    let mut out = String::new();
    writeln!(out, "# Comparison: `{name_a}` vs `{name_b}`\n").unwrap();
    writeln!(out, "| label | f1 `{name_a}` | f1 `{name_b}` | delta |").unwrap();
    writeln!(out, "|---|---|---|---|").unwrap();
    for d in &comparison.per_label {
        writeln!(
            out,
            "| {} | {:.4} | {:.4} | {:+.4} |",
            d.label, d.f1_a, d.f1_b, d.delta
        )
        .unwrap();
    }
    writeln!(
        out,
        "| **macro** | — | — | {:+.4} |",
        comparison.f1_macro_delta
    )
    .unwrap();
    writeln!(
        out,
        "| **micro** | — | — | {:+.4} |",
        comparison.f1_micro_delta
    )
    .unwrap();
    out
}
