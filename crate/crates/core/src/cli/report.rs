//! Report files and table rendering.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::metrics::MetricsReport;

/// A metrics report with the row label it is shown under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledReport {
    #[serde(default)]
    pub label: String,
    #[serde(flatten)]
    pub report: MetricsReport,
}

impl LabeledReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn read_report(path: &Path) -> Result<LabeledReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut report: LabeledReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    if report.label.is_empty() {
        report.label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(report)
}

fn prompted(r: &MetricsReport) -> bool {
    r.accuracy.is_some() || r.control_score.is_some()
}

/// Column headers: Novelty, Playability, Diversity, Score, with Accuracy
/// before Diversity and Control Score last for prompted runs.
pub fn headers(prompted: bool) -> Vec<&'static str> {
    if prompted {
        vec![
            "Novelty",
            "Playability",
            "Accuracy",
            "Diversity",
            "Score",
            "Control Score",
        ]
    } else {
        vec!["Novelty", "Playability", "Diversity", "Score"]
    }
}

pub fn values(r: &MetricsReport) -> Vec<f64> {
    if prompted(r) {
        vec![
            r.novelty,
            r.playability,
            r.accuracy.unwrap_or(0.0),
            r.diversity,
            r.score,
            r.control_score.unwrap_or(0.0),
        ]
    } else {
        vec![r.novelty, r.playability, r.diversity, r.score]
    }
}

/// Two-decimal cells, e.g. 0.5349 renders as `0.53`.
pub fn render_row(r: &MetricsReport) -> Vec<String> {
    values(r).into_iter().map(|v| format!("{v:.2}")).collect()
}

/// Renders reports as an aligned text table. All reports must share one
/// column layout.
pub fn render_table(reports: &[LabeledReport]) -> Result<String, CliError> {
    let first = reports
        .first()
        .ok_or_else(|| CliError::Schema("no reports given".to_string()))?;
    let layout = prompted(&first.report);
    if let Some(odd) = reports.iter().find(|r| prompted(&r.report) != layout) {
        return Err(CliError::Schema(format!(
            "report {:?} has a different column layout than {:?}",
            odd.label, first.label
        )));
    }
    let headers = headers(layout);
    let label_width = reports
        .iter()
        .map(|r| r.label.chars().count())
        .max()
        .unwrap_or(0)
        .max(1);
    let mut out = format!("{:<label_width$}", "");
    for h in &headers {
        out.push_str(&format!("  {h:>11}"));
    }
    out.push('\n');
    for r in reports {
        out.push_str(&format!("{:<label_width$}", r.label));
        for cell in render_row(&r.report) {
            out.push_str(&format!("  {cell:>11}"));
        }
        out.push('\n');
    }
    Ok(out)
}
