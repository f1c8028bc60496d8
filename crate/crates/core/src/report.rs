//! Structured outcome of a verification run.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `value <= threshold`.
    AtMost,
    /// Passes when `value >= threshold`.
    AtLeast,
    /// Recorded for reference; always passes.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    /// Non-finite values are written as `null`.
    #[serde(with = "finite_or_null")]
    pub value: f64,
    pub threshold: Option<f64>,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Metric {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: Some(threshold),
            comparison: Comparison::AtMost,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: Some(threshold),
            comparison: Comparison::AtLeast,
            pass: value >= threshold,
        }
    }

    pub fn record(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: None,
            comparison: Comparison::Record,
            pass: true,
        }
    }

    /// A check that could not be evaluated; always fails.
    pub fn failed(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            threshold: None,
            comparison: Comparison::AtMost,
            pass: false,
        }
    }
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub phase: String,
    pub milliseconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub artifact_version: String,
    pub config: Value,
    pub metrics: Vec<Metric>,
    pub diagnostics: Vec<String>,
    pub pass: bool,
    pub timings: Vec<Timing>,
}

impl VerificationReport {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            config: Value::Null,
            metrics: Vec::new(),
            diagnostics: Vec::new(),
            pass: false,
            timings: Vec::new(),
        }
    }

    pub fn push(&mut self, metric: Metric) {
        self.metrics.push(metric);
        self.pass = self.metrics.iter().all(|m| m.pass);
    }

    pub fn extend(&mut self, metrics: impl IntoIterator<Item = Metric>) {
        for m in metrics {
            self.push(m);
        }
    }

    pub fn note(&mut self, message: impl Into<String>) {
        self.diagnostics.push(message.into());
    }

    pub fn time(&mut self, phase: impl Into<String>, milliseconds: f64) {
        self.timings.push(Timing {
            phase: phase.into(),
            milliseconds,
        });
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Checks the report invariants: at least one metric, and the overall
    /// flag equal to the conjunction of the metric flags.
    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::InvalidInput(format!("report `{}` has no metrics", self.scenario)));
        }
        if self.pass != self.metrics.iter().all(|m| m.pass) {
            return Err(Error::InvalidInput("overall pass flag disagrees with metrics".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_tracks_metrics() {
        let mut r = VerificationReport::new("x");
        assert!(r.validate().is_err());
        r.push(Metric::at_most("a", 1.0, 2.0));
        assert!(r.pass);
        r.push(Metric::at_least("b", 1.0, 2.0));
        assert!(!r.pass);
        r.validate().unwrap();
        assert!(!Metric::at_most("nan", f64::NAN, 1.0).pass);
        assert!(Metric::record("r", 5.0).pass);
    }
}
