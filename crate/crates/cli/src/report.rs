//! Machine-readable run reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use twistor_core::twistor::ResidualReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub description: String,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub worst_point: Vec<f64>,
    /// Extra quantities specific to the check (fitted constants, ranks).
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl CheckRecord {
    pub fn from_residual(id: &str, description: &str, r: &ResidualReport) -> CheckRecord {
        CheckRecord {
            id: id.to_string(),
            description: description.to_string(),
            points: r.points,
            max_residual: r.max_residual,
            mean_residual: r.mean_residual,
            tol: r.tolerance,
            verdict: if r.pass { Verdict::Pass } else { Verdict::Fail },
            worst_point: r.worst_point.clone(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> CheckRecord {
        self.details = details;
        self
    }

    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunInfo {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub run: RunInfo,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(command: &str, config: impl Serialize, seed: u64) -> Report {
        Report {
            run: RunInfo {
                command: command.to_string(),
                config: serde_json::to_value(config).unwrap_or(Value::Null),
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            checks: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(CheckRecord::pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_csv(&self) -> std::io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "id",
            "description",
            "points",
            "max_residual",
            "mean_residual",
            "tol",
            "verdict",
            "worst_point",
        ])?;
        for c in &self.checks {
            let worst: Vec<String> = c.worst_point.iter().map(|v| format!("{v:?}")).collect();
            w.write_record([
                c.id.clone(),
                c.description.clone(),
                c.points.to_string(),
                format!("{:?}", c.max_residual),
                format!("{:?}", c.mean_residual),
                format!("{:?}", c.tol),
                if c.pass() { "pass" } else { "fail" }.to_string(),
                worst.join(";"),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn render(&self, format: Format) -> std::io::Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Write `text` to `path`, or to stdout when there is no path.
pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(pass: bool) -> Report {
        let mut r = Report::new("verify", serde_json::json!({ "points": 3 }), 5);
        r.checks.push(CheckRecord::from_residual(
            "ckf",
            "conformal Killing",
            &ResidualReport {
                check: "ckf:x".into(),
                points: 3,
                max_residual: 2e-9,
                mean_residual: 1e-9,
                tolerance: 1e-7,
                pass,
                worst_point: vec![0.5, -1.0],
            },
        ));
        r
    }

    #[test]
    fn verdict_follows_checks() {
        assert!(sample_report(true).pass());
        assert!(!sample_report(false).pass());
    }

    #[test]
    fn json_skips_empty_details() {
        let text = sample_report(true).to_json();
        assert!(!text.contains("details"));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["checks"][0]["verdict"], "pass");
        assert_eq!(v["run"]["seed"], 5);
    }

    #[test]
    fn csv_rows() {
        let text = sample_report(false).to_csv().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[1],
            "ckf,conformal Killing,3,2e-9,1e-9,1e-7,fail,0.5;-1.0"
        );
    }
}
