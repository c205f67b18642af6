use std::collections::HashMap;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// A named vocabulary with one dense row per word.
///
/// Immutable after construction. Tokens are case-sensitive and compared
/// byte-for-byte.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    name: String,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Array2<f64>,
}

impl EmbeddingSet {
    /// Builds a set, checking that tokens are unique, the matrix has one row
    /// per token, `dim > 0`, and every entry is finite.
    pub fn new(name: impl Into<String>, vocab: Vec<String>, matrix: Array2<f64>) -> Result<Self> {
        if matrix.ncols() == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        if matrix.nrows() != vocab.len() {
            return Err(Error::InvalidArgument(format!(
                "{} tokens but {} matrix rows",
                vocab.len(),
                matrix.nrows()
            )));
        }
        if let Some(((r, _), _)) = matrix.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value in row of `{}`", vocab[r])));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, w) in vocab.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::DuplicateToken(w.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            vocab,
            index,
            matrix,
        })
    }

    /// Builds a set from `(token, vector)` pairs; all vectors must share a length.
    pub fn from_rows<S: Into<String>>(
        name: impl Into<String>,
        rows: impl IntoIterator<Item = (S, Vec<f64>)>,
    ) -> Result<Self> {
        let mut vocab = Vec::new();
        let mut flat = Vec::new();
        let mut dim = None;
        for (w, v) in rows {
            let w = w.into();
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::InvalidArgument(format!(
                        "row `{w}` has {} values, expected {d}",
                        v.len()
                    )))
                }
                _ => {}
            }
            vocab.push(w);
            flat.extend(v);
        }
        let dim = dim.ok_or_else(|| Error::InvalidArgument("no rows given".into()))?;
        let matrix =
            Array2::from_shape_vec((vocab.len(), dim), flat).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(name, vocab, matrix)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// The stored row of `word`, or [`Error::OutOfVocabulary`].
    pub fn lookup(&self, word: &str) -> Result<ArrayView1<'_, f64>> {
        self.get(word).ok_or_else(|| Error::OutOfVocabulary(word.to_string()))
    }

    pub fn get(&self, word: &str) -> Option<ArrayView1<'_, f64>> {
        self.index_of(word).map(|i| self.matrix.row(i))
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(i)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same vocabulary, new vectors (the dimension may change).
    pub fn with_matrix(&self, matrix: Array2<f64>) -> Result<Self> {
        Self::new(self.name.clone(), self.vocab.clone(), matrix)
    }

    /// Sub-table over `words`, in the given order.
    pub fn restrict<S: AsRef<str>>(&self, words: &[S]) -> Result<Self> {
        let rows = words
            .iter()
            .map(|w| {
                self.index_of(w.as_ref())
                    .ok_or_else(|| Error::OutOfVocabulary(w.as_ref().into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let matrix = self.matrix.select(Axis(0), &rows);
        Self::new(
            self.name.clone(),
            words.iter().map(|w| w.as_ref().to_string()).collect(),
            matrix,
        )
    }

    /// Splits `words` into those present in the vocabulary and those missing.
    pub fn partition_known<'a, S: AsRef<str>>(&self, words: &'a [S]) -> (Vec<&'a str>, Vec<&'a str>) {
        words.iter().map(|w| w.as_ref()).partition(|w| self.contains(w))
    }
}

/// Equality over vocabulary order and matrix values; the name is ignored.
impl PartialEq for EmbeddingSet {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab && self.matrix == other.matrix
    }
}
