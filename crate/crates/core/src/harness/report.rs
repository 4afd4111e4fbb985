use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "REPORT_ONLY")]
    ReportOnly,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ReportOnly => "REPORT_ONLY",
        }
    }
}

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub analysis: String,
    /// Sequence label, or `set` for set-level statistics.
    pub sequence: String,
    pub item: String,
    /// An integer count, or an exact rational for correlation values.
    pub empirical: String,
    pub predicted: Option<String>,
    pub predicted_decimal: Option<String>,
    /// `|empirical − predicted|`, 15 significant digits.
    pub deviation: Option<String>,
    pub budget: Option<String>,
    pub budget_formula: Option<String>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the compact JSON encoding of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub modulus: u64,
    pub set_size: usize,
    pub rows: Vec<ReportRow>,
    pub status: Status,
    /// Wall-clock time; the only field that varies between identical runs.
    pub timing_seconds: f64,
}

pub const CSV_HEADER: [&str; 10] = [
    "analysis",
    "sequence",
    "item",
    "empirical",
    "predicted",
    "predicted_decimal",
    "deviation",
    "budget",
    "budget_formula",
    "status",
];

impl ReportRow {
    pub fn csv_fields(&self) -> [&str; 10] {
        fn opt(s: &Option<String>) -> &str {
            s.as_deref().unwrap_or("")
        }
        [
            &self.analysis,
            &self.sequence,
            &self.item,
            &self.empirical,
            opt(&self.predicted),
            opt(&self.predicted_decimal),
            opt(&self.deviation),
            opt(&self.budget),
            opt(&self.budget_formula),
            self.status.as_str(),
        ]
    }
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            path: "report".into(),
            message: e.to_string(),
        })
    }

    /// One header row and one row per compared quantity.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.csv_fields()).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Drops the timing field so two renderings can be compared byte for byte.
pub fn strip_timing(rendered: &str) -> String {
    rendered
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timing_seconds\""))
        .collect::<Vec<_>>()
        .join("\n")
}
