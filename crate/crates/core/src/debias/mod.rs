//! Debiasing methods behind a common [`Debiaser`] interface.

mod dict;
mod hard;
mod inlp;
mod lexicon;
mod preservation;
mod sif;

use serde::{Deserialize, Serialize};

pub use dict::{dict_debias, rejection, DictModel, DictObjective, DictOutput, Rejection};
pub use hard::{bias_subspace, hard_debias, BiasBasis};
pub use inlp::{gender_training_data, inlp_debias, InlpOutput};
pub use lexicon::{GenderLexicon, NeutralPolicy, ResolvedPairs};
pub use preservation::{compose_bases, preservation_check, ComposeMode};
pub use sif::{sif_gloss_embed, sif_gloss_embed_with, DictCorpus, SifGlosses, DEFAULT_SIF_A};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::{Method, OptimizerConfig};

/// A debiased embedding plus words that could not be treated.
#[derive(Debug, Clone)]
pub struct Debiased {
    pub set: EmbeddingSet,
    /// Words left unchanged because debiasing was undefined for them.
    pub degenerate: Vec<String>,
    /// Lexicon tokens absent from the vocabulary.
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DebiasMethod {
    Hard,
    Inlp,
    Dict,
}

impl DebiasMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DebiasMethod::Hard => "hard",
            DebiasMethod::Inlp => "inlp",
            DebiasMethod::Dict => "dict",
        }
    }
}

impl std::str::FromStr for DebiasMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(DebiasMethod::Hard),
            "inlp" => Ok(DebiasMethod::Inlp),
            "dict" => Ok(DebiasMethod::Dict),
            other => Err(Error::InvalidArgument(format!("unknown debias method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DebiasConfig {
    pub method: DebiasMethod,
    /// Bias-subspace rank (hard).
    pub k: usize,
    /// Number of null-space projections (inlp).
    pub m: usize,
    /// Loss weights (dict); must sum to 1.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rejection: Rejection,
    pub sif_a: f64,
    /// Encoder training (dict).
    pub optimizer: OptimizerConfig,
    /// Bias classifier training (inlp).
    pub classifier: OptimizerConfig,
    pub seed: u64,
}

impl Default for DebiasConfig {
    fn default() -> Self {
        Self {
            method: DebiasMethod::Hard,
            k: 1,
            m: 35,
            alpha: 0.2,
            beta: 0.4,
            gamma: 0.4,
            rejection: Rejection::True,
            sif_a: DEFAULT_SIF_A,
            optimizer: OptimizerConfig {
                method: Method::Adagrad,
                learning_rate: 0.05,
                epochs: 100,
                batch_size: usize::MAX,
                seed: 0,
                tolerance: 0.0,
            },
            classifier: OptimizerConfig::logistic_default(),
            seed: 0,
        }
    }
}

impl DebiasConfig {
    pub fn hard(k: usize) -> Self {
        Self {
            method: DebiasMethod::Hard,
            k,
            ..Default::default()
        }
    }

    pub fn inlp(m: usize) -> Self {
        Self {
            method: DebiasMethod::Inlp,
            m,
            ..Default::default()
        }
    }

    pub fn dict() -> Self {
        Self {
            method: DebiasMethod::Dict,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.optimizer.seed = seed;
        self.classifier.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 {
            return Err(Error::InvalidArgument("k and m must be at least 1".into()));
        }
        let weights = [self.alpha, self.beta, self.gamma];
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "dict weights must be non-negative and sum to 1 (got {}, {}, {})",
                self.alpha, self.beta, self.gamma
            )));
        }
        self.optimizer.validate()?;
        self.classifier.validate()
    }
}

/// Inputs a debiaser may draw on besides the embedding itself.
#[derive(Debug, Clone, Copy)]
pub struct DebiasContext<'a> {
    pub lexicon: &'a GenderLexicon,
    pub corpus: Option<&'a DictCorpus>,
}

pub trait Debiaser {
    /// Short label used in embedding names and reports.
    fn label(&self) -> String;

    fn debias(&self, set: &EmbeddingSet, ctx: &DebiasContext<'_>) -> Result<Debiased>;
}

impl Debiaser for DebiasConfig {
    fn label(&self) -> String {
        self.method.as_str().to_string()
    }

    fn debias(&self, set: &EmbeddingSet, ctx: &DebiasContext<'_>) -> Result<Debiased> {
        self.validate()?;
        let name = format!("{}+{}", set.name(), self.label());
        let out = match self.method {
            DebiasMethod::Hard => {
                let (basis, missing) = bias_subspace(set, ctx.lexicon, self.k)?;
                let mut d = hard_debias(set, &basis, ctx.lexicon)?;
                d.missing = missing;
                d
            }
            DebiasMethod::Inlp => {
                let o = inlp_debias(set, ctx.lexicon, self)?;
                Debiased {
                    set: o.set,
                    degenerate: Vec::new(),
                    missing: o.missing,
                }
            }
            DebiasMethod::Dict => {
                let corpus = ctx
                    .corpus
                    .ok_or_else(|| Error::Config("dict debiasing needs a gloss corpus".into()))?;
                let corpus = DictCorpus {
                    sif_a: self.sif_a,
                    ..corpus.clone()
                };
                let o = dict_debias(set, &corpus, self)?;
                Debiased {
                    set: o.set,
                    degenerate: o.excluded,
                    missing: o.dropped,
                }
            }
        };
        Ok(Debiased {
            set: out.set.with_name(name),
            ..out
        })
    }
}

/// Passes embeddings through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDebiaser;

impl Debiaser for IdentityDebiaser {
    fn label(&self) -> String {
        "none".to_string()
    }

    fn debias(&self, set: &EmbeddingSet, _ctx: &DebiasContext<'_>) -> Result<Debiased> {
        Ok(Debiased {
            set: set.clone(),
            degenerate: Vec::new(),
            missing: Vec::new(),
        })
    }
}
