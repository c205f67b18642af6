//! Dictionary glosses and their smoothed-inverse-frequency embeddings.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::top_right_singular;

/// Default SIF smoothing constant `a`.
pub const DEFAULT_SIF_A: f64 = 1e-3;

/// Word glosses plus unigram probabilities for SIF weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct DictCorpus {
    pub glosses: BTreeMap<String, String>,
    pub unigram_probs: HashMap<String, f64>,
    pub sif_a: f64,
}

impl DictCorpus {
    pub fn new(glosses: BTreeMap<String, String>, unigram_probs: HashMap<String, f64>, sif_a: f64) -> Result<Self> {
        if !(sif_a > 0.0) || !sif_a.is_finite() {
            return Err(Error::InvalidArgument("SIF parameter a must be positive".into()));
        }
        if let Some((w, p)) = unigram_probs.iter().find(|(_, &p)| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "probability of `{w}` is {p}, outside (0, 1]"
            )));
        }
        if let Some((w, _)) = glosses.iter().find(|(_, g)| g.trim().is_empty()) {
            return Err(Error::InvalidArgument(format!("gloss of `{w}` is empty")));
        }
        Ok(Self {
            glosses,
            unigram_probs,
            sif_a,
        })
    }

    /// Reads `token<TAB>gloss` lines and a JSON object of unigram probabilities.
    pub fn load(glosses: impl AsRef<Path>, unigram: impl AsRef<Path>, sif_a: f64) -> Result<Self> {
        let gpath = glosses.as_ref();
        let text = fs::read_to_string(gpath).map_err(|e| Error::io(gpath, e))?;
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (tok, gloss) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(gpath.display().to_string(), i + 1, "expected `token<TAB>gloss`"))?;
            if map.insert(tok.to_string(), gloss.to_string()).is_some() {
                return Err(Error::DuplicateToken(tok.to_string()));
            }
        }
        let upath = unigram.as_ref();
        let text = fs::read_to_string(upath).map_err(|e| Error::io(upath, e))?;
        let probs: HashMap<String, f64> = serde_json::from_str(&text).map_err(|source| Error::Json {
            context: upath.display().to_string(),
            source,
        })?;
        Self::new(map, probs, sif_a)
    }

    /// Gloss tokens: whitespace-split with surrounding punctuation trimmed.
    pub fn tokens(gloss: &str) -> impl Iterator<Item = &str> {
        gloss
            .split_whitespace()
            .map(|t| t.trim_matches(|c: char| c.is_ascii_punctuation()))
            .filter(|t| !t.is_empty())
    }

    /// SIF weight `a / (a + p(t))`; tokens without a probability weigh 1.
    pub fn weight(&self, token: &str) -> f64 {
        let p = self.unigram_probs.get(token).copied().unwrap_or(0.0);
        self.sif_a / (self.sif_a + p)
    }

    /// Drops glosses whose headword is not in `set` or that have no token in
    /// `set`; returns the trimmed corpus and the dropped headwords.
    pub fn restrict_to(&self, set: &EmbeddingSet) -> (DictCorpus, Vec<String>) {
        let mut kept = BTreeMap::new();
        let mut dropped = Vec::new();
        for (w, g) in &self.glosses {
            if set.contains(w) && Self::tokens(g).any(|t| set.contains(t)) {
                kept.insert(w.clone(), g.clone());
            } else {
                dropped.push(w.clone());
            }
        }
        (
            DictCorpus {
                glosses: kept,
                unigram_probs: self.unigram_probs.clone(),
                sif_a: self.sif_a,
            },
            dropped,
        )
    }
}

#[derive(Debug, Clone)]
pub struct SifGlosses {
    /// One gloss vector per headword found in the embedding, sorted by headword.
    pub set: EmbeddingSet,
    /// Gloss tokens that were not in the embedding vocabulary.
    pub skipped_tokens: usize,
    /// Direction removed from every gloss vector (when removal was enabled).
    pub removed_direction: Option<Array1<f64>>,
}

/// Gloss embeddings: `g(w) = Σ_t a/(a + p(t)) · v(t) / n_t` over the resolvable
/// gloss tokens, optionally followed by removal of the first (uncentred)
/// principal direction of the gloss matrix.
pub fn sif_gloss_embed_with(set: &EmbeddingSet, corpus: &DictCorpus, remove_pc: bool) -> Result<SifGlosses> {
    let mut vocab = Vec::new();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (w, gloss) in &corpus.glosses {
        if !set.contains(w) {
            continue;
        }
        let mut acc = Array1::<f64>::zeros(set.dim());
        let mut n = 0usize;
        for t in DictCorpus::tokens(gloss) {
            match set.get(t) {
                Some(v) => {
                    acc.scaled_add(corpus.weight(t), &v);
                    n += 1;
                }
                None => skipped += 1,
            }
        }
        if n == 0 {
            return Err(Error::EmptyGloss(w.clone()));
        }
        vocab.push(w.clone());
        rows.push(acc / n as f64);
    }
    let mut m = Array2::zeros((rows.len(), set.dim()));
    for (i, r) in rows.iter().enumerate() {
        m.row_mut(i).assign(r);
    }
    let mut removed = None;
    if remove_pc && m.nrows() > 0 {
        let u = top_right_singular(&m)?;
        let coef = m.dot(&u);
        for (mut row, c) in m.rows_mut().into_iter().zip(coef.iter()) {
            row.scaled_add(-c, &u);
        }
        removed = Some(u);
    }
    Ok(SifGlosses {
        set: EmbeddingSet::new(format!("{}-glosses", set.name()), vocab, m)?,
        skipped_tokens: skipped,
        removed_direction: removed,
    })
}

/// SIF gloss embeddings with the first principal direction removed.
pub fn sif_gloss_embed(set: &EmbeddingSet, corpus: &DictCorpus) -> Result<EmbeddingSet> {
    sif_gloss_embed_with(set, corpus, true).map(|g| g.set)
}
