//! Hard-debiasing (neutralise step): remove the bias-subspace component of
//! every gender-neutral word and renormalise.

use ndarray::{Array1, Array2, ArrayView1};

use super::{Debiased, GenderLexicon};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::{orthonormality_error, svd};

/// Orthonormal bias directions, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasBasis {
    vectors: Array2<f64>,
}

impl BiasBasis {
    /// Wraps `vectors` (rows), checking pairwise orthonormality within 1e-8.
    pub fn new(vectors: Array2<f64>) -> Result<Self> {
        if vectors.nrows() == 0 || vectors.ncols() == 0 {
            return Err(Error::InvalidArgument("bias basis must be non-empty".into()));
        }
        let err = orthonormality_error(&vectors.t().to_owned());
        if err > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "bias directions are not orthonormal (error {err:e})"
            )));
        }
        Ok(Self { vectors })
    }

    pub fn k(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn direction(&self, j: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(j)
    }

    /// `v_B = Σ_j (vᵀb_j) b_j`.
    pub fn project(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        let coef = self.vectors.dot(&v);
        self.vectors.t().dot(&coef)
    }

    /// `v − v_B`, applied twice to clean up rounding.
    pub fn reject(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut r = &v - &self.project(v);
        let again = self.project(r.view());
        r -= &again;
        r
    }
}

/// Fits the bias subspace from the lexicon's defining pairs.
///
/// With `μ_i` the mean of pair `D_i`, the basis is the top-`k` right singular
/// directions of `C = Σ_i Σ_{w∈D_i} (w − μ_i)(w − μ_i)ᵀ / |D_i|`. Pairs with
/// out-of-vocabulary tokens are skipped; their tokens are returned.
pub fn bias_subspace(set: &EmbeddingSet, lex: &GenderLexicon, k: usize) -> Result<(BiasBasis, Vec<String>)> {
    if k == 0 || k > set.dim() {
        return Err(Error::InvalidArgument(format!(
            "subspace rank {k} must be in 1..={}",
            set.dim()
        )));
    }
    let resolved = GenderLexicon::resolve_pairs(&lex.defining_pairs, set);
    if resolved.pairs.is_empty() {
        return Err(Error::EmptyDefiningSets);
    }
    let dim = set.dim();
    let mut c = Array2::<f64>::zeros((dim, dim));
    for &(a, b) in &resolved.pairs {
        let (va, vb) = (set.row(a), set.row(b));
        let mu = (&va + &vb) / 2.0;
        for v in [va, vb] {
            let dev = (&v - &mu).insert_axis(ndarray::Axis(1));
            c += &(dev.dot(&dev.t()) / 2.0);
        }
    }
    let d = svd(&c, k)?;
    let top = d.values[0];
    if top == 0.0 || d.values[k - 1] <= 1e-12 * top {
        return Err(Error::DegenerateSubspace(format!(
            "defining pairs span fewer than {k} directions"
        )));
    }
    let basis = BiasBasis::new(d.v.t().to_owned())?;
    Ok((basis, resolved.missing))
}

/// Projects every gender-neutral word off `basis` and renormalises it;
/// definitional words pass through unchanged. Words with no component outside
/// the subspace are left unchanged and listed in [`Debiased::degenerate`].
pub fn hard_debias(set: &EmbeddingSet, basis: &BiasBasis, lex: &GenderLexicon) -> Result<Debiased> {
    if basis.dim() != set.dim() {
        return Err(Error::InvalidArgument(format!(
            "basis dimension {} differs from embedding dimension {}",
            basis.dim(),
            set.dim()
        )));
    }
    let neutral = lex.neutral_mask(set);
    let mut out = set.matrix().clone();
    let mut degenerate = Vec::new();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        if !neutral[i] {
            continue;
        }
        let w = set.row(i);
        let scale = w.dot(&w).sqrt();
        let r = basis.reject(w);
        let norm = r.dot(&r).sqrt();
        if scale == 0.0 || norm <= 1e-10 * scale {
            degenerate.push(set.vocab()[i].clone());
            continue;
        }
        row.assign(&(r / norm));
    }
    Ok(Debiased {
        set: set.with_matrix(out)?,
        degenerate,
        missing: Vec::new(),
    })
}
