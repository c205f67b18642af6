//! Global linear meta-embedding: every source is reconstructed from a shared
//! meta vector through a source-specific linear map.
//!
//! Minimises `Σ_j α_j (Σ_w ‖A_j m(w) − s_j(w)‖² + ‖A_j‖²_F)` over the words
//! all sources share, by alternating exact least-squares updates of the
//! maps and of the meta vectors.

use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{source_weights, MetaConfig};
use crate::embedding::{AlignedSources, EmbeddingSet};
use crate::error::{Error, Result};
use crate::eval::SimilarityDataset;
use crate::numerics::{cosine, pearson, solve_psd};

#[derive(Debug, Clone)]
pub struct GleOutput {
    pub set: EmbeddingSet,
    /// `A_j`, each `d_j × d_m`.
    pub projections: Vec<Array2<f64>>,
    pub weights: Vec<f64>,
    /// Objective after initialisation and after every sweep.
    pub losses: Vec<f64>,
}

/// Per-source weights `max(r_j, 0)` normalised to sum 1, where `r_j` is the
/// Pearson correlation between cosine similarity in source `j` and the human
/// ratings. Falls back to uniform weights when no source correlates
/// positively.
pub fn calibrate_weights(sources: &[EmbeddingSet], data: &SimilarityDataset) -> Vec<f64> {
    let raw: Vec<f64> = sources
        .iter()
        .map(|s| {
            let (mut cos, mut human) = (Vec::new(), Vec::new());
            for (a, b, r) in data.entries() {
                if let (Some(va), Some(vb)) = (s.get(a), s.get(b)) {
                    if va.dot(&va) > 0.0 && vb.dot(&vb) > 0.0 {
                        cos.push(cosine(va, vb));
                        human.push(*r);
                    }
                }
            }
            pearson(&cos, &human).map(|r| r.max(0.0)).unwrap_or(0.0)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|r| r / total).collect()
    } else {
        vec![1.0 / sources.len() as f64; sources.len()]
    }
}

/// The training objective for given maps and meta vectors (`|T| × d_m`).
pub fn gle_objective(targets: &[Array2<f64>], weights: &[f64], maps: &[Array2<f64>], meta: &Array2<f64>) -> f64 {
    targets
        .iter()
        .zip(weights)
        .zip(maps)
        .map(|((s, a), m)| {
            let recon = meta.dot(&m.t()) - s;
            a * (recon.iter().map(|v| v * v).sum::<f64>() + m.iter().map(|v| v * v).sum::<f64>())
        })
        .sum()
}

/// Meta vectors minimising the objective for fixed maps, for rows of `inputs`
/// (one matrix per source, absent words as zero rows).
fn meta_step(inputs: &[Array2<f64>], weights: &[f64], maps: &[Array2<f64>]) -> Result<Array2<f64>> {
    let dm = maps[0].ncols();
    let mut gram = Array2::zeros((dm, dm));
    let mut rhs = Array2::zeros((inputs[0].nrows(), dm));
    for ((s, a), m) in inputs.iter().zip(weights).zip(maps) {
        gram.scaled_add(*a, &m.t().dot(m));
        rhs.scaled_add(*a, &s.dot(m));
    }
    Ok(solve_psd(&gram, &rhs.t().to_owned())?.t().to_owned())
}

/// Maps minimising the objective for fixed meta vectors:
/// `A_jᵀ = (MᵀM + I)⁻¹ Mᵀ S_j`.
fn map_step(targets: &[Array2<f64>], meta: &Array2<f64>) -> Result<Vec<Array2<f64>>> {
    let dm = meta.ncols();
    let k = meta.t().dot(meta) + Array2::<f64>::eye(dm);
    targets
        .iter()
        .map(|s| Ok(solve_psd(&k, &meta.t().dot(s))?.t().to_owned()))
        .collect()
}

pub fn gle_fit(aligned: &AlignedSources, cfg: &MetaConfig) -> Result<GleOutput> {
    cfg.validate()?;
    let train = aligned.intersection_indices();
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let n = aligned.n_sources();
    let weights = match (&cfg.source_weights, &cfg.similarity_calibration) {
        (Some(w), _) => source_weights(Some(w), n, "source_weights")?,
        (None, Some(data)) => calibrate_weights(aligned.sources(), data),
        (None, None) => vec![1.0 / n as f64; n],
    };
    let dims = aligned.dims();
    let dm = cfg.dim_or(dims.iter().copied().max().unwrap_or(1));

    let full: Vec<Array2<f64>> = (0..n).map(|j| aligned.source_matrix(j)).collect();
    let targets: Vec<Array2<f64>> = full.iter().map(|m| m.select(ndarray::Axis(0), &train)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 1.0 / (dm as f64).sqrt();
    let mut maps: Vec<Array2<f64>> = dims
        .iter()
        .map(|&d| Array2::from_shape_simple_fn((d, dm), || rng.random_range(-bound..bound)))
        .collect();
    let mut meta = meta_step(&targets, &weights, &maps)?;
    let mut loss = gle_objective(&targets, &weights, &maps, &meta);
    let mut losses = vec![loss];
    let tol = cfg.optimizer.tolerance;
    for _ in 0..cfg.optimizer.epochs {
        let new_maps = map_step(&targets, &meta)?;
        let new_meta = meta_step(&targets, &weights, &new_maps)?;
        let new_loss = gle_objective(&targets, &weights, &new_maps, &new_meta);
        if !new_loss.is_finite() {
            return Err(Error::Numeric("gle objective diverged".into()));
        }
        // Exact block updates cannot increase the objective; a rise can only
        // be rounding at convergence.
        if new_loss > loss {
            break;
        }
        let improvement = loss - new_loss;
        maps = new_maps;
        meta = new_meta;
        loss = new_loss;
        losses.push(loss);
        if improvement <= tol * loss.abs().max(1.0) {
            break;
        }
    }

    // Every word, including those some sources lack (zero inputs).
    let all = meta_step(&full, &weights, &maps)?;
    let mut out = all;
    for (row, &w) in train.iter().enumerate() {
        out.slice_mut(s![w, ..]).assign(&meta.row(row));
    }
    Ok(GleOutput {
        set: aligned.to_set("gle", out)?,
        projections: maps,
        weights,
        losses,
    })
}
