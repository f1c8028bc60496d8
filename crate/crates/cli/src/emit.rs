//! Report and plot-data files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use psido_core::report::Comparison;
use psido_core::VerificationReport;

use crate::scenarios::Plot;

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_DIR: &str = "plots";

/// Pretty JSON with a trailing newline; the report is validated first.
pub fn report_json(report: &VerificationReport) -> Result<String> {
    report.validate().context("refusing to emit an invalid report")?;
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}

pub fn parse_report(text: &str) -> Result<VerificationReport> {
    Ok(serde_json::from_str(text)?)
}

/// One row per metric: `name,value,threshold,comparison,pass`.
pub fn summary_csv(report: &VerificationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "value", "threshold", "comparison", "pass"])?;
    for m in &report.metrics {
        let comparison = match m.comparison {
            Comparison::AtMost => "at_most",
            Comparison::AtLeast => "at_least",
            Comparison::Record => "record",
        };
        w.write_record([
            m.name.clone(),
            format_value(m.value),
            m.threshold.map(format_value).unwrap_or_default(),
            comparison.to_string(),
            m.pass.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        String::new()
    }
}

pub fn plot_csv(plot: &Plot) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "value", "series"])?;
    for (x, v, series) in &plot.rows {
        w.write_record([format_value(*x), format_value(*v), series.clone()])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Writes `report.json`, `summary.csv` and `plots/*.csv` under `dir`.
pub fn emit(report: &VerificationReport, plots: &[Plot], dir: &Path) -> Result<Vec<PathBuf>> {
    let json = report_json(report)?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = vec![
        write(dir.join(REPORT_FILE), &json)?,
        write(dir.join(SUMMARY_FILE), &summary_csv(report)?)?,
    ];
    if !plots.is_empty() {
        let plot_dir = dir.join(PLOT_DIR);
        fs::create_dir_all(&plot_dir).with_context(|| format!("cannot create {}", plot_dir.display()))?;
        for plot in plots {
            written.push(write(plot_dir.join(format!("{}.csv", plot.name)), &plot_csv(plot)?)?);
        }
    }
    Ok(written)
}
