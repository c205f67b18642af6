//! Word-similarity benchmarks scored by Spearman correlation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::{cosine, spearman};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDataset {
    entries: Vec<(String, String, f64)>,
}

impl SimilarityDataset {
    pub fn new(entries: Vec<(String, String, f64)>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InsufficientData(entries.len()));
        }
        if let Some((a, b, r)) = entries.iter().find(|e| !e.2.is_finite()) {
            return Err(Error::InvalidArgument(format!("rating for {a}/{b} is not finite: {r}")));
        }
        Ok(Self { entries })
    }

    /// Reads `a<TAB>b<TAB>rating` lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::parse(
                    path.display().to_string(),
                    n + 1,
                    format!("expected 3 columns, found {}", cols.len()),
                ));
            }
            let r: f64 = cols[2]
                .parse()
                .map_err(|_| Error::parse(path.display().to_string(), n + 1, format!("bad rating `{}`", cols[2])))?;
            if !r.is_finite() {
                return Err(Error::parse(path.display().to_string(), n + 1, "rating is not finite"));
            }
            entries.push((cols[0].to_string(), cols[1].to_string(), r));
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(String, String, f64)] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    pub spearman: f64,
    pub n_scored: usize,
    pub n_skipped: usize,
}

impl SimilarityResult {
    /// Spearman × 100, rounded to one decimal.
    pub fn reported(&self) -> f64 {
        (self.spearman * 1000.0).round() / 10.0
    }
}

pub fn similarity_benchmark(set: &EmbeddingSet, data: &SimilarityDataset) -> Result<SimilarityResult> {
    let (mut cos, mut human) = (Vec::new(), Vec::new());
    let mut skipped = 0;
    for (a, b, r) in &data.entries {
        let pair = set.get(a).zip(set.get(b));
        match pair {
            Some((va, vb)) if va.dot(&va) > 0.0 && vb.dot(&vb) > 0.0 => {
                cos.push(cosine(va, vb));
                human.push(*r);
            }
            _ => skipped += 1,
        }
    }
    if cos.len() < 2 {
        return Err(Error::InsufficientData(cos.len()));
    }
    Ok(SimilarityResult {
        spearman: spearman(&cos, &human)?,
        n_scored: cos.len(),
        n_skipped: skipped,
    })
}
