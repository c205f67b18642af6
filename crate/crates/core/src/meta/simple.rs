use ndarray::{s, Array2};

use crate::embedding::{AlignedSources, EmbeddingSet};
use crate::error::Result;

/// Row-wise concatenation, zero blocks for words a source lacks.
pub fn conc(aligned: &AlignedSources) -> Result<EmbeddingSet> {
    let dims = aligned.dims();
    let mut m = Array2::zeros((aligned.len(), dims.iter().sum()));
    let mut offset = 0;
    for (j, d) in dims.iter().enumerate() {
        m.slice_mut(s![.., offset..offset + d])
            .assign(&aligned.source_matrix(j));
        offset += d;
    }
    aligned.to_set("conc", m)
}

/// Mean of zero-padded source vectors; every source counts in the
/// denominator, present or not.
pub fn avg(aligned: &AlignedSources) -> Result<EmbeddingSet> {
    let dims = aligned.dims();
    let width = dims.iter().copied().max().unwrap_or(0);
    let mut m = Array2::zeros((aligned.len(), width));
    for (j, d) in dims.iter().enumerate() {
        let mut block = m.slice_mut(s![.., ..*d]);
        block += &aligned.source_matrix(j);
    }
    m /= aligned.n_sources() as f64;
    aligned.to_set("avg", m)
}
