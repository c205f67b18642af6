//! Autoencoded meta-embedding.
//!
//! Two sources are encoded into a shared `d_m`-dimensional space by
//! `E_j(x) = tanh(W_j x + b_j)` and reconstructed by affine decoders `D_j`.
//! Training minimises `Σ_w Σ_j λ_j ‖s_j(w) − D_j(E_j(s_j(w)))‖²` over shared
//! words; the meta-embedding is the ℓ2-normalised sum `E_1(s_1) + E_2(s_2)`.
//! More than two sources are folded left: the meta-embedding of the first
//! two is combined with the third, and so on.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{source_weights, MetaConfig};
use crate::embedding::{align, AlignedSources, EmbeddingSet};
use crate::error::{Error, Result};
use crate::numerics::{minimize, Activation, Dense, Objective};

#[derive(Debug, Clone, PartialEq)]
pub struct AemeModel {
    pub encoders: [Dense; 2],
    pub decoders: [Dense; 2],
}

impl AemeModel {
    pub fn random(dims: [usize; 2], meta_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e0 = Dense::uniform(dims[0], meta_dim, Activation::Tanh, &mut rng);
        let e1 = Dense::uniform(dims[1], meta_dim, Activation::Tanh, &mut rng);
        let d0 = Dense::uniform(meta_dim, dims[0], Activation::Identity, &mut rng);
        let d1 = Dense::uniform(meta_dim, dims[1], Activation::Identity, &mut rng);
        Self {
            encoders: [e0, e1],
            decoders: [d0, d1],
        }
    }

    /// Linear identity encoders and decoders on equal-dimension sources.
    pub fn identity(dim: usize) -> Self {
        let id = || Dense::identity(dim, Activation::Identity);
        Self {
            encoders: [id(), id()],
            decoders: [id(), id()],
        }
    }

    fn meta_dim(&self) -> usize {
        self.encoders[0].outputs()
    }

    pub fn to_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in self.encoders.iter().chain(&self.decoders) {
            l.write_params(&mut out);
        }
        out
    }

    pub fn from_params(dims: [usize; 2], meta_dim: usize, theta: &[f64]) -> Self {
        let (e0, rest) = Dense::read_params(dims[0], meta_dim, Activation::Tanh, theta);
        let (e1, rest) = Dense::read_params(dims[1], meta_dim, Activation::Tanh, rest);
        let (d0, rest) = Dense::read_params(meta_dim, dims[0], Activation::Identity, rest);
        let (d1, _) = Dense::read_params(meta_dim, dims[1], Activation::Identity, rest);
        Self {
            encoders: [e0, e1],
            decoders: [d0, d1],
        }
    }

    /// Offsets of the four layers in the packed parameter vector.
    fn offsets(&self) -> [usize; 4] {
        let mut out = [0; 4];
        let mut acc = 0;
        for (o, l) in out.iter_mut().zip(self.encoders.iter().chain(&self.decoders)) {
            *o = acc;
            acc += l.n_params();
        }
        out
    }
}

/// Normalised `E_1(s_1(w)) + E_2(s_2(w))` for every aligned word (absent
/// source vectors enter as zeros).
pub fn aeme_embed(aligned: &AlignedSources, model: &AemeModel) -> Result<EmbeddingSet> {
    if aligned.n_sources() != 2 {
        return Err(Error::InvalidArgument(
            "aeme combines exactly two sources at a time".into(),
        ));
    }
    let mut out = Array2::zeros((aligned.len(), model.meta_dim()));
    for w in 0..aligned.len() {
        let sum = model.encoders[0].forward(aligned.vector(0, w).view())
            + model.encoders[1].forward(aligned.vector(1, w).view());
        let norm = sum.dot(&sum).sqrt();
        if !(norm > 0.0) {
            return Err(Error::DegenerateVector(aligned.vocab()[w].clone()));
        }
        out.row_mut(w).assign(&(sum / norm));
    }
    aligned.to_set("aeme", out)
}

/// Weighted reconstruction loss over the words both sources cover.
pub struct AemeObjective {
    inputs: [Array2<f64>; 2],
    lambda: [f64; 2],
    dims: [usize; 2],
    meta_dim: usize,
}

impl AemeObjective {
    pub fn new(aligned: &AlignedSources, lambda: [f64; 2], meta_dim: usize) -> Self {
        let train = aligned.intersection_indices();
        let pick = |j| aligned.source_matrix(j).select(ndarray::Axis(0), &train);
        Self {
            inputs: [pick(0), pick(1)],
            lambda,
            dims: [aligned.dims()[0], aligned.dims()[1]],
            meta_dim,
        }
    }

    fn word_loss(
        &self,
        model: &AemeModel,
        j: usize,
        x: ArrayView1<'_, f64>,
        grad: Option<(&mut [f64], [usize; 4])>,
    ) -> f64 {
        let (enc, dec) = (&model.encoders[j], &model.decoders[j]);
        let h = enc.forward(x);
        let y = dec.forward(h.view());
        let r: Array1<f64> = &y - &x;
        let loss = self.lambda[j] * r.dot(&r);
        if let Some((grad, off)) = grad {
            let dy = r * (2.0 * self.lambda[j]);
            let (dec_off, enc_off) = (off[2 + j], off[j]);
            let dh = dec.backward(
                h.view(),
                y.view(),
                dy.view(),
                &mut grad[dec_off..dec_off + dec.n_params()],
            );
            enc.backward(x, h.view(), dh.view(), &mut grad[enc_off..enc_off + enc.n_params()]);
        }
        loss
    }
}

impl Objective for AemeObjective {
    fn n_examples(&self) -> usize {
        self.inputs[0].nrows()
    }

    fn loss_grad(&self, theta: &[f64], batch: &[usize], grad: &mut [f64]) -> f64 {
        let model = AemeModel::from_params(self.dims, self.meta_dim, theta);
        let off = model.offsets();
        let mut loss = 0.0;
        for &i in batch {
            for j in 0..2 {
                loss += self.word_loss(&model, j, self.inputs[j].row(i), Some((&mut *grad, off)));
            }
        }
        loss
    }
}

#[derive(Debug, Clone)]
pub struct AemeOutput {
    pub set: EmbeddingSet,
    /// Models of each pairwise stage, in fold order.
    pub models: Vec<AemeModel>,
    /// Epoch losses of each stage.
    pub losses: Vec<Vec<f64>>,
}

fn fit_pair(
    aligned: &AlignedSources,
    lambda: [f64; 2],
    meta_dim: usize,
    cfg: &MetaConfig,
    stage: u64,
) -> Result<(EmbeddingSet, AemeModel, Vec<f64>)> {
    let objective = AemeObjective::new(aligned, lambda, meta_dim);
    if objective.n_examples() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let dims = objective.dims;
    let mut theta = AemeModel::random(dims, meta_dim, cfg.seed.wrapping_add(stage)).to_params();
    let trace = minimize(&objective, &mut theta, &cfg.optimizer)?;
    let model = AemeModel::from_params(dims, meta_dim, &theta);
    Ok((aeme_embed(aligned, &model)?, model, trace.losses))
}

pub fn aeme_fit(aligned: &AlignedSources, cfg: &MetaConfig) -> Result<AemeOutput> {
    cfg.validate()?;
    let n = aligned.n_sources();
    if n < 2 {
        return Err(Error::InvalidArgument("aeme needs at least two sources".into()));
    }
    let lambda = source_weights(cfg.lambda.as_deref(), n, "lambda")?;
    let total: f64 = lambda.iter().sum();
    let lambda: Vec<f64> = lambda.iter().map(|l| l / total).collect();
    let meta_dim = cfg.dim_or(aligned.dims().into_iter().max().unwrap_or(1));
    let policy = aligned.policy();

    let sources = aligned.sources();
    let first = align(&sources[..2], policy)?;
    let (mut current, model, losses) = fit_pair(&first, [lambda[0], lambda[1]], meta_dim, cfg, 0)?;
    let mut models = vec![model];
    let mut all_losses = vec![losses];
    let mut folded = lambda[0] + lambda[1];
    for j in 2..n {
        let pair = align(&[current, sources[j].clone()], policy)?;
        let w = folded + lambda[j];
        let (next, model, losses) = fit_pair(&pair, [folded / w, lambda[j] / w], meta_dim, cfg, j as u64)?;
        current = next;
        models.push(model);
        all_losses.push(losses);
        folded = w;
    }
    // Reorder rows to the caller's aligned vocabulary.
    let rows: Vec<usize> = aligned
        .vocab()
        .iter()
        .map(|w| current.index_of(w).expect("fold covers the same vocabulary"))
        .collect();
    let matrix = current.matrix().select(ndarray::Axis(0), &rows);
    Ok(AemeOutput {
        set: aligned.to_set("aeme", matrix)?,
        models,
        losses: all_losses,
    })
}
