//! Evaluation reports: one row per (embedding, metric), emitted as TSV or JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TSV_HEADER: &str = "label\tmetric\tscore\tskipped\tfingerprint";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// `<meta>:<debias>:<stage>`, e.g. `avg:hard:pre`.
    pub label: String,
    pub metric: String,
    pub score: f64,
    pub skipped: usize,
    pub fingerprint: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Json,
}

impl ReportFormat {
    /// JSON for `.json` paths, TSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Tsv,
        }
    }
}

/// Hex SHA-256 of `bytes`, truncated to 16 characters.
pub fn fingerprint(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl EvalReport {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            rows: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, label: &str, metric: &str, score: f64, skipped: usize, fingerprint: &str) {
        self.rows.push(ReportRow {
            label: label.to_string(),
            metric: metric.to_string(),
            score,
            skipped,
            fingerprint: fingerprint.to_string(),
        });
    }

    pub fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
    }

    /// Score of `metric` for `label`, if present.
    pub fn score(&self, label: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.label == label && r.metric == metric)
            .map(|r| r.score)
    }

    /// Distinct labels in first-appearance order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.label.as_str()) {
                out.push(&r.label);
            }
        }
        out
    }

    /// Header line, then one line per row. Scores use the shortest
    /// representation that parses back to the same value.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.label, r.metric, r.score, r.skipped, r.fingerprint
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_tsv(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == TSV_HEADER => {}
            _ => return Err(Error::parse(origin, 1, "missing report header")),
        }
        let mut report = EvalReport::default();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(Error::parse(
                    origin,
                    n + 1,
                    format!("expected 5 columns, found {}", cols.len()),
                ));
            }
            let score = cols[2]
                .parse()
                .map_err(|_| Error::parse(origin, n + 1, format!("bad score `{}`", cols[2])))?;
            let skipped = cols[3]
                .parse()
                .map_err(|_| Error::parse(origin, n + 1, format!("bad skipped count `{}`", cols[3])))?;
            report.push(cols[0], cols[1], score, skipped, cols[4]);
        }
        Ok(report)
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json {
            context: origin.to_string(),
            source: e,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
        let path = path.as_ref();
        let text = match format {
            ReportFormat::Tsv => self.to_tsv(),
            ReportFormat::Json => self.to_json(),
        };
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Loads a report, choosing the format from the extension.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let origin = path.display().to_string();
        match ReportFormat::from_path(path) {
            ReportFormat::Json => Self::from_json(&text, &origin),
            ReportFormat::Tsv => Self::from_tsv(&text, &origin),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EvalReport {
        let mut r = EvalReport::new(Provenance {
            spec_hash: "abc".into(),
            seed: 3,
        });
        r.push("avg:none:msnd", "weat", 0.123456789012345, 0, "f00d");
        r.push("avg:none:msnd", "sl", 47.1, 2, "f00d");
        r.push("conc:hard:pre", "weat", -1e-7, 1, "beef");
        r
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(EvalReport::default().to_tsv(), format!("{TSV_HEADER}\n"));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(EvalReport::from_json(&r.to_json(), "t").unwrap(), r);
    }

    #[test]
    fn tsv_round_trip_keeps_rows() {
        let r = sample();
        let back = EvalReport::from_tsv(&r.to_tsv(), "t").unwrap();
        assert_eq!(back.rows, r.rows);
    }

    #[test]
    fn lookup_and_labels() {
        let r = sample();
        assert_eq!(r.score("avg:none:msnd", "sl"), Some(47.1));
        assert_eq!(r.labels(), vec!["avg:none:msnd", "conc:hard:pre"]);
    }

    #[test]
    fn malformed_tsv() {
        assert!(matches!(
            EvalReport::from_tsv("nope\n", "x"),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad = format!("{TSV_HEADER}\na\tb\tnan?\t0\tf\n");
        assert!(matches!(
            EvalReport::from_tsv(&bad, "x"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fingerprint(b"abc"), "ba7816bf8f01cfea");
    }
}
