//! Dictionary-based debiasing.
//!
//! An encoder `E` is trained so that its code (i) decodes back to the word
//! vector, (ii) decodes to the word's gloss embedding, and (iii) is orthogonal
//! to the encoded rejection of the word vector on its gloss vector. The
//! debiased embedding is `E(w)`.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sif::{sif_gloss_embed_with, DictCorpus};
use super::DebiasConfig;
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::{minimize, Activation, Dense, Objective};

/// How the gloss rejection `φ(w, g)` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rejection {
    /// `w − (wᵀg) g / ‖g‖²`, orthogonal to `g`.
    #[default]
    True,
    /// `w − (wᵀg) g / ‖g‖`, orthogonal to `g` only when `‖g‖ = 1`.
    Printed,
}

pub fn rejection(w: ArrayView1<'_, f64>, g: ArrayView1<'_, f64>, kind: Rejection) -> Array1<f64> {
    let gg = g.dot(&g);
    if gg == 0.0 {
        return w.to_owned();
    }
    let denom = match kind {
        Rejection::True => gg,
        Rejection::Printed => gg.sqrt(),
    };
    let mut out = w.to_owned();
    out.scaled_add(-w.dot(&g) / denom, &g);
    out
}

/// Encoder plus the reconstruction and gloss decoders.
#[derive(Debug, Clone, PartialEq)]
pub struct DictModel {
    pub encoder: Dense,
    pub recon: Dense,
    pub gloss: Dense,
}

impl DictModel {
    /// `tanh` encoder and affine decoders, uniformly initialised from `seed`.
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            encoder: Dense::uniform(dim, dim, Activation::Tanh, &mut rng),
            recon: Dense::uniform(dim, dim, Activation::Identity, &mut rng),
            gloss: Dense::uniform(dim, dim, Activation::Identity, &mut rng),
        }
    }

    pub fn dim(&self) -> usize {
        self.encoder.inputs()
    }

    pub fn to_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.encoder.write_params(&mut out);
        self.recon.write_params(&mut out);
        self.gloss.write_params(&mut out);
        out
    }

    pub fn from_params(dim: usize, encoder_activation: Activation, theta: &[f64]) -> Self {
        let (encoder, rest) = Dense::read_params(dim, dim, encoder_activation, theta);
        let (recon, rest) = Dense::read_params(dim, dim, Activation::Identity, rest);
        let (gloss, _) = Dense::read_params(dim, dim, Activation::Identity, rest);
        Self { encoder, recon, gloss }
    }

    pub fn encode(&self, set: &EmbeddingSet) -> Array2<f64> {
        let mut out = Array2::zeros((set.len(), self.encoder.outputs()));
        for (i, row) in set.matrix().rows().into_iter().enumerate() {
            out.row_mut(i).assign(&self.encoder.forward(row));
        }
        out
    }
}

/// `J = Σ_w αJ_c(w) + βJ_d(w) + γJ_a(w)` over the training words.
pub struct DictObjective {
    words: Array2<f64>,
    glosses: Array2<f64>,
    // None when the gloss vector is zero: the word skips J_a
    rejections: Vec<Option<Array1<f64>>>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    dim: usize,
    encoder_activation: Activation,
}

impl DictObjective {
    pub fn new(
        words: Array2<f64>,
        glosses: Array2<f64>,
        weights: (f64, f64, f64),
        rejection_kind: Rejection,
        encoder_activation: Activation,
    ) -> Self {
        let rejections = words
            .rows()
            .into_iter()
            .zip(glosses.rows())
            .map(|(w, g)| (g.dot(&g) > 0.0).then(|| rejection(w, g, rejection_kind)))
            .collect();
        Self {
            dim: words.ncols(),
            words,
            glosses,
            rejections,
            alpha: weights.0,
            beta: weights.1,
            gamma: weights.2,
            encoder_activation,
        }
    }
}

impl Objective for DictObjective {
    fn n_examples(&self) -> usize {
        self.words.nrows()
    }

    fn loss_grad(&self, theta: &[f64], batch: &[usize], grad: &mut [f64]) -> f64 {
        let model = DictModel::from_params(self.dim, self.encoder_activation, theta);
        let n_enc = model.encoder.n_params();
        let n_rec = model.recon.n_params();
        let (g_enc, rest) = grad.split_at_mut(n_enc);
        let (g_rec, g_gls) = rest.split_at_mut(n_rec);
        let mut loss = 0.0;
        for &i in batch {
            let w = self.words.row(i);
            let g = self.glosses.row(i);
            let h = model.encoder.forward(w);
            let mut dh = Array1::<f64>::zeros(h.len());

            let rc = model.recon.forward(h.view());
            let diff_c = &rc - &w;
            loss += self.alpha * diff_c.dot(&diff_c);
            let d_rc = diff_c * (2.0 * self.alpha);
            dh += &model.recon.backward(h.view(), rc.view(), d_rc.view(), g_rec);

            let rd = model.gloss.forward(h.view());
            let diff_d = &rd - &g;
            loss += self.beta * diff_d.dot(&diff_d);
            let d_rd = diff_d * (2.0 * self.beta);
            dh += &model.gloss.backward(h.view(), rd.view(), d_rd.view(), g_gls);

            if let Some(phi) = &self.rejections[i] {
                let hp = model.encoder.forward(phi.view());
                let p = hp.dot(&h);
                loss += self.gamma * p * p;
                let coef = 2.0 * self.gamma * p;
                dh.scaled_add(coef, &hp);
                let dhp = &h * coef;
                model.encoder.backward(phi.view(), hp.view(), dhp.view(), g_enc);
            }
            model.encoder.backward(w, h.view(), dh.view(), g_enc);
        }
        loss
    }
}

#[derive(Debug, Clone)]
pub struct DictOutput {
    pub set: EmbeddingSet,
    pub model: DictModel,
    /// Objective before training, then after each accepted epoch.
    pub losses: Vec<f64>,
    /// Training words whose gloss vector is zero (excluded from `J_a`).
    pub excluded: Vec<String>,
    /// Gloss headwords dropped because they or all their tokens are unknown.
    pub dropped: Vec<String>,
}

pub fn dict_debias(set: &EmbeddingSet, corpus: &DictCorpus, cfg: &DebiasConfig) -> Result<DictOutput> {
    cfg.validate()?;
    let (corpus, dropped) = corpus.restrict_to(set);
    if corpus.glosses.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let glosses = sif_gloss_embed_with(set, &corpus, true)?.set;
    let words = set.restrict(glosses.vocab())?;
    let excluded = glosses
        .vocab()
        .iter()
        .zip(glosses.matrix().rows())
        .filter(|(_, g)| g.dot(g) == 0.0)
        .map(|(w, _)| w.clone())
        .collect();
    let objective = DictObjective::new(
        words.matrix().clone(),
        glosses.matrix().clone(),
        (cfg.alpha, cfg.beta, cfg.gamma),
        cfg.rejection,
        Activation::Tanh,
    );
    let model = DictModel::random(set.dim(), cfg.seed);
    let mut theta = model.to_params();
    let trace = minimize(&objective, &mut theta, &cfg.optimizer)?;
    let model = DictModel::from_params(set.dim(), Activation::Tanh, &theta);
    let out = model.encode(set);
    Ok(DictOutput {
        set: set.with_matrix(out)?,
        model,
        losses: trace.losses,
        excluded,
        dropped,
    })
}
