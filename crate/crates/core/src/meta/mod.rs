//! Meta-embedding learners: combine several aligned source embeddings into
//! one embedding per word.

mod aeme;
mod gle;
mod lle;
mod simple;

use serde::{Deserialize, Serialize};

pub use aeme::{aeme_embed, aeme_fit, AemeModel, AemeObjective, AemeOutput};
pub use gle::{calibrate_weights, gle_fit, gle_objective, GleOutput};
pub use lle::{lle_fit, neighbors, LleOutput};
pub use simple::{avg, conc};

use crate::embedding::{AlignedSources, EmbeddingSet};
use crate::error::{Error, Result};
use crate::eval::SimilarityDataset;
use crate::numerics::{Method, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaMethod {
    Conc,
    Avg,
    Gle,
    Lle,
    Aeme,
}

impl MetaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MetaMethod::Conc => "conc",
            MetaMethod::Avg => "avg",
            MetaMethod::Gle => "gle",
            MetaMethod::Lle => "lle",
            MetaMethod::Aeme => "aeme",
        }
    }
}

impl std::str::FromStr for MetaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conc" => Ok(MetaMethod::Conc),
            "avg" => Ok(MetaMethod::Avg),
            "gle" => Ok(MetaMethod::Gle),
            "lle" => Ok(MetaMethod::Lle),
            "aeme" => Ok(MetaMethod::Aeme),
            other => Err(Error::InvalidArgument(format!(
                "unknown meta-embedding method `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaConfig {
    pub method: MetaMethod,
    /// Output dimension for gle, lle and aeme. Defaults to the largest
    /// source dimension (capped by the training vocabulary for lle).
    pub meta_dim: Option<usize>,
    /// Per-source weights for gle; uniform when absent.
    pub source_weights: Option<Vec<f64>>,
    /// Nearest neighbours per source for lle.
    pub neighbors: usize,
    /// Per-source reconstruction weights for aeme; uniform when absent.
    pub lambda: Option<Vec<f64>>,
    pub optimizer: OptimizerConfig,
    /// Word-pair ratings used to derive gle source weights.
    pub similarity_calibration: Option<SimilarityDataset>,
    pub seed: u64,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self {
            method: MetaMethod::Avg,
            meta_dim: None,
            source_weights: None,
            neighbors: 5,
            lambda: None,
            optimizer: OptimizerConfig {
                method: Method::Adagrad,
                learning_rate: 0.05,
                epochs: 200,
                batch_size: usize::MAX,
                seed: 0,
                tolerance: 0.0,
            },
            similarity_calibration: None,
            seed: 0,
        }
    }
}

impl MetaConfig {
    pub fn new(method: MetaMethod) -> Self {
        Self {
            method,
            ..Default::default()
        }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.meta_dim = Some(dim);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.optimizer.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.optimizer.epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.meta_dim == Some(0) {
            return Err(Error::InvalidArgument("meta_dim must be positive".into()));
        }
        if self.neighbors == 0 {
            return Err(Error::InvalidArgument("neighbors must be positive".into()));
        }
        for (name, w) in [("source_weights", &self.source_weights), ("lambda", &self.lambda)] {
            if let Some(w) = w {
                if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "{name} must be finite, non-negative and not all zero"
                    )));
                }
            }
        }
        self.optimizer.validate()
    }

    fn dim_or(&self, default: usize) -> usize {
        self.meta_dim.unwrap_or(default)
    }
}

/// Weights for `n` sources: `given` (checked for length) or uniform.
pub(crate) fn source_weights(given: Option<&[f64]>, n: usize, what: &str) -> Result<Vec<f64>> {
    match given {
        Some(w) if w.len() != n => Err(Error::InvalidArgument(format!(
            "{what} has {} entries for {n} sources",
            w.len()
        ))),
        Some(w) => Ok(w.to_vec()),
        None => Ok(vec![1.0; n]),
    }
}

/// Combines aligned sources into a single embedding.
pub trait MetaLearner {
    fn label(&self) -> String;

    fn fit(&self, aligned: &AlignedSources) -> Result<EmbeddingSet>;
}

impl MetaLearner for MetaConfig {
    fn label(&self) -> String {
        self.method.as_str().to_string()
    }

    fn fit(&self, aligned: &AlignedSources) -> Result<EmbeddingSet> {
        fit(aligned, self)
    }
}

/// Dispatches to the configured learner.
pub fn fit(aligned: &AlignedSources, cfg: &MetaConfig) -> Result<EmbeddingSet> {
    cfg.validate()?;
    if aligned.n_sources() == 0 {
        return Err(Error::InvalidArgument("no source embeddings".into()));
    }
    let set = match cfg.method {
        MetaMethod::Conc => conc(aligned)?,
        MetaMethod::Avg => avg(aligned)?,
        MetaMethod::Gle => gle_fit(aligned, cfg)?.set,
        MetaMethod::Lle => lle_fit(aligned, cfg)?.set,
        MetaMethod::Aeme => aeme_fit(aligned, cfg)?.set,
    };
    let names: Vec<&str> = aligned.sources().iter().map(|s| s.name()).collect();
    Ok(set.with_name(format!("{}({})", cfg.method.as_str(), names.join(","))))
}
