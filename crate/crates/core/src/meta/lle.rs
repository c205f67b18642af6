//! Locally linear meta-embedding.
//!
//! Each word is written as a weighted combination of its nearest neighbours
//! in every source (weights shared across sources, fitted with the training
//! harness). The meta-embedding is then the bottom non-trivial eigenvectors of
//! `(I − C)ᵀ(I − C)`, where `C_ww'` is the learned weight times the number of
//! sources in which `w'` neighbours `w`.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2, ArrayView1};

use super::MetaConfig;
use crate::embedding::{AlignedSources, EmbeddingSet};
use crate::error::{Error, Result};
use crate::numerics::{minimize, sym_eigen, Objective, Trace};

#[derive(Debug, Clone)]
pub struct LleOutput {
    pub set: EmbeddingSet,
    /// `C` over the training words (rows and columns in training order).
    pub coupling: Array2<f64>,
    /// Aligned-vocabulary index of each training word.
    pub training_words: Vec<usize>,
    /// Eigenvalues of the selected eigenvectors, ascending.
    pub eigenvalues: Vec<f64>,
    pub trace: Trace,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` candidates closest to `word` in `source` (squared Euclidean
/// distance, ties broken by index), excluding `word` itself.
pub fn neighbors(source: &Array2<f64>, word: usize, candidates: &[usize], k: usize) -> Vec<usize> {
    let v = source.row(word);
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != word)
        .map(|&c| (sq_dist(v, source.row(c)), c))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, c)| c).collect()
}

/// Neighbourhood of one word: the union of per-source neighbour lists, and
/// for each source the slots (into that union) of its neighbours.
struct Neighbourhood {
    word: usize,
    members: Vec<usize>,
    per_source: Vec<Option<Vec<usize>>>,
}

struct Reconstruction<'a> {
    sources: &'a [Array2<f64>],
    hoods: Vec<Neighbourhood>,
    offsets: Vec<usize>,
}

impl Objective for Reconstruction<'_> {
    fn n_examples(&self) -> usize {
        self.hoods.len()
    }

    fn loss_grad(&self, theta: &[f64], batch: &[usize], grad: &mut [f64]) -> f64 {
        let mut loss = 0.0;
        for &i in batch {
            let h = &self.hoods[i];
            let off = self.offsets[i];
            for (j, slots) in h.per_source.iter().enumerate() {
                let Some(slots) = slots else { continue };
                let s = &self.sources[j];
                let mut r: Array1<f64> = s.row(h.word).to_owned();
                for &slot in slots {
                    r.scaled_add(-theta[off + slot], &s.row(h.members[slot]));
                }
                loss += r.dot(&r);
                for &slot in slots {
                    grad[off + slot] -= 2.0 * r.dot(&s.row(h.members[slot]));
                }
            }
        }
        loss
    }
}

pub fn lle_fit(aligned: &AlignedSources, cfg: &MetaConfig) -> Result<LleOutput> {
    cfg.validate()?;
    let train = aligned.intersection_indices();
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let k = cfg.neighbors;
    if k >= train.len() {
        return Err(Error::InvalidArgument(format!(
            "{k} neighbours requested but only {} shared words",
            train.len()
        )));
    }
    let dm = cfg.dim_or(aligned.dims().into_iter().max().unwrap_or(1).min(train.len() - 1));
    if dm + 1 > train.len() {
        return Err(Error::InvalidArgument(format!(
            "meta_dim {dm} needs more than {} shared words",
            train.len()
        )));
    }
    let sources: Vec<Array2<f64>> = (0..aligned.n_sources()).map(|j| aligned.source_matrix(j)).collect();

    let hoods: Vec<Neighbourhood> = (0..aligned.len())
        .map(|w| {
            let lists: Vec<Option<Vec<usize>>> = (0..sources.len())
                .map(|j| aligned.is_present(w, j).then(|| neighbors(&sources[j], w, &train, k)))
                .collect();
            let members: Vec<usize> = lists
                .iter()
                .flatten()
                .flatten()
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let per_source = lists
                .into_iter()
                .map(|l| l.map(|l| l.iter().map(|n| members.binary_search(n).expect("member")).collect()))
                .collect();
            Neighbourhood {
                word: w,
                members,
                per_source,
            }
        })
        .collect();
    let mut offsets = Vec::with_capacity(hoods.len());
    let mut total = 0;
    for h in &hoods {
        offsets.push(total);
        total += h.members.len();
    }
    let mut theta: Vec<f64> = hoods
        .iter()
        .flat_map(|h| std::iter::repeat_n(1.0 / h.members.len().max(1) as f64, h.members.len()))
        .collect();
    let objective = Reconstruction {
        sources: &sources,
        hoods,
        offsets,
    };
    let trace = minimize(&objective, &mut theta, &cfg.optimizer)?;

    // Coupling matrix over training words.
    let n = train.len();
    let mut pos = vec![usize::MAX; aligned.len()];
    for (t, &w) in train.iter().enumerate() {
        pos[w] = t;
    }
    let mut c = Array2::<f64>::zeros((n, n));
    for (t, &w) in train.iter().enumerate() {
        let h = &objective.hoods[w];
        let off = objective.offsets[w];
        for slots in h.per_source.iter().flatten() {
            for &slot in slots {
                c[[t, pos[h.members[slot]]]] += theta[off + slot];
            }
        }
    }
    let i_minus_c = Array2::<f64>::eye(n) - &c;
    let gram = i_minus_c.t().dot(&i_minus_c);
    let spectrum = sym_eigen(&gram)?;
    // Eigenvalues come sorted descending; skip the smallest and take the next dm.
    let chosen: Vec<usize> = (0..dm).map(|i| n - 2 - i).collect();
    let mut meta = Array2::<f64>::zeros((aligned.len(), dm));
    for (t, &w) in train.iter().enumerate() {
        for (col, &e) in chosen.iter().enumerate() {
            meta[[w, col]] = spectrum.vectors[[t, e]];
        }
    }

    // Words outside the training set: weights renormalised to sum 1 over
    // their neighbours' meta vectors.
    for (w, h) in objective.hoods.iter().enumerate() {
        if pos[w] != usize::MAX || h.members.is_empty() {
            continue;
        }
        let off = objective.offsets[w];
        let weights = &theta[off..off + h.members.len()];
        let sum: f64 = weights.iter().sum();
        let norm: Vec<f64> = if sum.abs() > 1e-12 {
            weights.iter().map(|a| a / sum).collect()
        } else {
            vec![1.0 / weights.len() as f64; weights.len()]
        };
        let mut row = Array1::<f64>::zeros(dm);
        for (a, &nb) in norm.iter().zip(&h.members) {
            row.scaled_add(*a, &meta.row(nb).to_owned());
        }
        meta.row_mut(w).assign(&row);
    }

    Ok(LleOutput {
        set: aligned.to_set("lle", meta)?,
        coupling: c,
        training_words: train,
        eigenvalues: chosen.iter().map(|&e| spectrum.values[e]).collect(),
        trace,
    })
}
