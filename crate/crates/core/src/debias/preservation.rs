//! Does a meta-embedding of hard-debiased sources stay orthogonal to the
//! sources' bias directions?
//!
//! Under concatenation the inner product with `b⁽¹⁾_j ⊕ b⁽²⁾_j` splits into
//! per-source terms that are each zero. Under averaging the inner product
//! with `b⁽¹⁾_j + b⁽²⁾_j` also contains cross terms `⟨d_1(w), b⁽²⁾_j⟩`, which
//! are not zero in general.

use ndarray::{concatenate, Array1, Axis};
use serde::{Deserialize, Serialize};

use super::{BiasBasis, GenderLexicon};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComposeMode {
    /// Bias vectors concatenated blockwise.
    Conc,
    /// Bias vectors summed.
    Avg,
}

/// Bias directions composed across sources, one per subspace index `j`.
pub fn compose_bases(bases: &[BiasBasis], mode: ComposeMode) -> Result<Vec<Array1<f64>>> {
    let first = bases
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one bias basis".into()))?;
    let k = first.k();
    if bases.iter().any(|b| b.k() != k) {
        return Err(Error::InvalidArgument("bias bases have different ranks".into()));
    }
    (0..k)
        .map(|j| match mode {
            ComposeMode::Conc => {
                let parts: Vec<_> = bases.iter().map(|b| b.direction(j)).collect();
                Ok(concatenate(Axis(0), &parts).expect("1-d views"))
            }
            ComposeMode::Avg => {
                if bases.iter().any(|b| b.dim() != first.dim()) {
                    return Err(Error::InvalidArgument("avg mode needs equal source dimensions".into()));
                }
                Ok(bases
                    .iter()
                    .fold(Array1::zeros(first.dim()), |acc, b| acc + &b.direction(j)))
            }
        })
        .collect()
}

/// Largest `|⟨m(w), composed b_j⟩|` over gender-neutral words (per `lex`) and
/// bias indices `j`.
pub fn preservation_check(
    meta: &EmbeddingSet,
    bases: &[BiasBasis],
    mode: ComposeMode,
    lex: &GenderLexicon,
) -> Result<f64> {
    let composed = compose_bases(bases, mode)?;
    let dim = composed[0].len();
    if dim != meta.dim() {
        return Err(Error::InvalidArgument(format!(
            "composed bias vectors have dimension {dim}, meta-embedding has {}",
            meta.dim()
        )));
    }
    let neutral = lex.neutral_mask(meta);
    let mut worst = 0.0f64;
    for (i, row) in meta.matrix().rows().into_iter().enumerate() {
        if !neutral[i] {
            continue;
        }
        for b in &composed {
            worst = worst.max(row.dot(b).abs());
        }
    }
    Ok(worst)
}
