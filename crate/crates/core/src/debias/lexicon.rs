use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::eval::WeatQuery;

/// Word lists driving the debiasers and bias evaluators.
///
/// Stored as JSON with keys `defining_pairs`, `seed_pairs`, `weat_queries`
/// and `neutral_words`; pairs are `[masculine, feminine]` arrays.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenderLexicon {
    pub defining_pairs: Vec<(String, String)>,
    #[serde(default)]
    pub seed_pairs: Vec<(String, String)>,
    #[serde(default)]
    pub weat_queries: Vec<WeatQuery>,
    /// Explicit gender-neutral words. `None` means every word that is not part
    /// of a defining pair.
    #[serde(default)]
    pub neutral_words: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeutralPolicy {
    AllButDefining,
    ExplicitList,
}

/// Pair indices resolved against a vocabulary, plus the tokens that were not found.
#[derive(Debug, Clone, Default)]
pub struct ResolvedPairs {
    pub pairs: Vec<(usize, usize)>,
    pub missing: Vec<String>,
}

impl GenderLexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn neutral_policy(&self) -> NeutralPolicy {
        match self.neutral_words {
            Some(_) => NeutralPolicy::ExplicitList,
            None => NeutralPolicy::AllButDefining,
        }
    }

    pub fn definitional_words(&self) -> HashSet<&str> {
        self.defining_pairs
            .iter()
            .flat_map(|(m, f)| [m.as_str(), f.as_str()])
            .collect()
    }

    /// Per-row flag of `set`: is the word gender-neutral under this lexicon's policy?
    pub fn neutral_mask(&self, set: &EmbeddingSet) -> Vec<bool> {
        match &self.neutral_words {
            Some(list) => {
                let keep: HashSet<&str> = list.iter().map(String::as_str).collect();
                set.vocab().iter().map(|w| keep.contains(w.as_str())).collect()
            }
            None => {
                let defining = self.definitional_words();
                set.vocab().iter().map(|w| !defining.contains(w.as_str())).collect()
            }
        }
    }

    pub fn resolve_pairs(pairs: &[(String, String)], set: &EmbeddingSet) -> ResolvedPairs {
        let mut out = ResolvedPairs::default();
        for (m, f) in pairs {
            match (set.index_of(m), set.index_of(f)) {
                (Some(a), Some(b)) => out.pairs.push((a, b)),
                (a, b) => {
                    if a.is_none() {
                        out.missing.push(m.clone());
                    }
                    if b.is_none() {
                        out.missing.push(f.clone());
                    }
                }
            }
        }
        out
    }

    /// Row indices of masculine and feminine words (defining pairs, then seed
    /// pairs, de-duplicated) with the tokens that were not found.
    pub fn gendered_examples(&self, set: &EmbeddingSet) -> (Vec<usize>, Vec<usize>, Vec<String>) {
        let mut seen = HashSet::new();
        let mut masc = Vec::new();
        let mut fem = Vec::new();
        let mut missing = Vec::new();
        for (m, f) in self.defining_pairs.iter().chain(&self.seed_pairs) {
            for (w, bucket) in [(m, &mut masc), (f, &mut fem)] {
                if !seen.insert(w.as_str()) {
                    continue;
                }
                match set.index_of(w) {
                    Some(i) => bucket.push(i),
                    None => missing.push(w.clone()),
                }
            }
        }
        (masc, fem, missing)
    }
}
