use std::collections::HashSet;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::EmbeddingSet;
use crate::error::{Error, Result};

/// How words missing from some sources are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignPolicy {
    /// Keep every word of every source; a word absent from source `j` reads
    /// as the zero vector there.
    #[default]
    UnionZero,
    /// Keep only words covered by every source.
    Intersection,
}

/// Sources indexed over a shared vocabulary.
#[derive(Debug, Clone)]
pub struct AlignedSources {
    sources: Vec<EmbeddingSet>,
    union_vocab: Vec<String>,
    // positions[w][j] = row of word w in source j
    positions: Vec<Vec<Option<usize>>>,
    policy: AlignPolicy,
}

/// Aligns `sources` over a common vocabulary. Union order is first appearance
/// scanning sources in order; intersection order follows the first source.
pub fn align(sources: &[EmbeddingSet], policy: AlignPolicy) -> Result<AlignedSources> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("align needs at least one source".into()));
    }
    let union_vocab: Vec<String> = match policy {
        AlignPolicy::UnionZero => {
            let mut seen = HashSet::new();
            sources
                .iter()
                .flat_map(|s| s.vocab())
                .filter(|w| seen.insert(w.as_str()))
                .cloned()
                .collect()
        }
        AlignPolicy::Intersection => sources[0]
            .vocab()
            .iter()
            .filter(|w| sources[1..].iter().all(|s| s.contains(w)))
            .cloned()
            .collect(),
    };
    let positions = union_vocab
        .iter()
        .map(|w| sources.iter().map(|s| s.index_of(w)).collect())
        .collect();
    Ok(AlignedSources {
        sources: sources.to_vec(),
        union_vocab,
        positions,
        policy,
    })
}

impl AlignedSources {
    pub fn sources(&self) -> &[EmbeddingSet] {
        &self.sources
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.union_vocab
    }

    pub fn len(&self) -> usize {
        self.union_vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.union_vocab.is_empty()
    }

    pub fn policy(&self) -> AlignPolicy {
        self.policy
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sources.iter().map(EmbeddingSet::dim).collect()
    }

    pub fn is_present(&self, word: usize, source: usize) -> bool {
        self.positions[word][source].is_some()
    }

    /// `|vocab| × N` mask, `true` where the word is covered by the source.
    pub fn presence(&self) -> Array2<bool> {
        Array2::from_shape_fn((self.len(), self.n_sources()), |(w, j)| self.is_present(w, j))
    }

    /// Vector of word `word` in source `source`; zeros when absent.
    pub fn vector(&self, source: usize, word: usize) -> Array1<f64> {
        match self.positions[word][source] {
            Some(r) => self.sources[source].row(r).to_owned(),
            None => Array1::zeros(self.sources[source].dim()),
        }
    }

    /// Source `source` laid out over the aligned vocabulary (`|vocab| × d_j`),
    /// zero rows for absent words.
    pub fn source_matrix(&self, source: usize) -> Array2<f64> {
        let s = &self.sources[source];
        let mut m = Array2::zeros((self.len(), s.dim()));
        for (w, pos) in self.positions.iter().enumerate() {
            if let Some(r) = pos[source] {
                m.row_mut(w).assign(&s.row(r));
            }
        }
        m
    }

    /// Indices (into [`Self::vocab`]) of words covered by every source.
    pub fn intersection_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&w| self.positions[w].iter().all(Option::is_some))
            .collect()
    }

    /// Restriction to words covered by every source, in aligned order.
    pub fn restrict_to_intersection(&self) -> AlignedSources {
        let keep = self.intersection_indices();
        AlignedSources {
            sources: self.sources.clone(),
            union_vocab: keep.iter().map(|&w| self.union_vocab[w].clone()).collect(),
            positions: keep.iter().map(|&w| self.positions[w].clone()).collect(),
            policy: AlignPolicy::Intersection,
        }
    }

    /// Wraps a matrix over the aligned vocabulary as an [`EmbeddingSet`].
    pub fn to_set(&self, name: impl Into<String>, matrix: Array2<f64>) -> Result<EmbeddingSet> {
        EmbeddingSet::new(name, self.union_vocab.clone(), matrix)
    }
}
