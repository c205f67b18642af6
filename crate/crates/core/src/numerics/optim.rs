//! A small first-order training harness.
//!
//! Each epoch shuffles the examples (seeded), runs SGD or AdaGrad updates over
//! mini-batches, then evaluates the full objective. An epoch that does not
//! decrease the objective is rolled back and retried at half the learning
//! rate, so the recorded per-epoch losses are non-increasing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sgd,
    Adagrad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Stop once an epoch improves the loss by no more than
    /// `tolerance · max(1, |loss|)`.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Adagrad,
            learning_rate: 0.1,
            epochs: 200,
            batch_size: usize::MAX,
            seed: 0,
            tolerance: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch_size must be positive".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument("tolerance must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

/// A differentiable objective that decomposes over examples.
pub trait Objective {
    fn n_examples(&self) -> usize;

    /// Loss summed over `batch`, with `grad` (zeroed, `theta`-sized) receiving
    /// its gradient. Regularisers contribute `|batch| / n_examples` of their
    /// full value so that the batches of an epoch sum to the full objective.
    fn loss_grad(&self, theta: &[f64], batch: &[usize], grad: &mut [f64]) -> f64;

    fn full_loss(&self, theta: &[f64]) -> f64 {
        let all: Vec<usize> = (0..self.n_examples()).collect();
        let mut scratch = vec![0.0; theta.len()];
        self.loss_grad(theta, &all, &mut scratch)
    }

    fn full_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let all: Vec<usize> = (0..self.n_examples()).collect();
        let mut g = vec![0.0; theta.len()];
        let l = self.loss_grad(theta, &all, &mut g);
        (l, g)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    /// Full objective before training followed by one value per accepted epoch.
    pub losses: Vec<f64>,
    pub rejected_epochs: usize,
}

impl Trace {
    pub fn initial(&self) -> f64 {
        self.losses[0]
    }

    pub fn last(&self) -> f64 {
        *self.losses.last().expect("trace always holds the initial loss")
    }

    /// Largest increase between consecutive recorded losses (≤ 0 when monotone).
    pub fn max_increase(&self) -> f64 {
        self.losses
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

const MAX_HALVINGS: usize = 40;

/// Minimises `obj` in place starting from `theta`.
pub fn minimize(obj: &dyn Objective, theta: &mut [f64], cfg: &OptimizerConfig) -> Result<Trace> {
    cfg.validate()?;
    let n = obj.n_examples();
    let mut loss = obj.full_loss(theta);
    if !loss.is_finite() {
        return Err(Error::Numeric("objective is not finite at the starting point".into()));
    }
    let mut trace = Trace {
        losses: vec![loss],
        rejected_epochs: 0,
    };
    if n == 0 {
        return Ok(trace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut accum = vec![0.0; theta.len()];
    let mut grad = vec![0.0; theta.len()];
    let mut lr = cfg.learning_rate;
    let mut halvings = 0;
    let batch = cfg.batch_size.min(n);

    for _ in 0..cfg.epochs {
        let saved_theta = theta.to_vec();
        let saved_accum = accum.clone();
        if batch < n {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            obj.loss_grad(theta, chunk, &mut grad);
            let inv = 1.0 / chunk.len() as f64;
            match cfg.method {
                Method::Sgd => {
                    for (t, g) in theta.iter_mut().zip(&grad) {
                        *t -= lr * g * inv;
                    }
                }
                Method::Adagrad => {
                    for ((t, g), a) in theta.iter_mut().zip(&grad).zip(accum.iter_mut()) {
                        let g = g * inv;
                        *a += g * g;
                        *t -= lr * g / (a.sqrt() + 1e-8);
                    }
                }
            }
        }
        let new_loss = obj.full_loss(theta);
        if new_loss.is_finite() && new_loss <= loss {
            let improvement = loss - new_loss;
            loss = new_loss;
            trace.losses.push(loss);
            halvings = 0;
            if improvement <= cfg.tolerance * loss.abs().max(1.0) {
                break;
            }
        } else {
            theta.copy_from_slice(&saved_theta);
            accum = saved_accum;
            trace.rejected_epochs += 1;
            lr *= 0.5;
            halvings += 1;
            if halvings > MAX_HALVINGS {
                break;
            }
        }
    }
    Ok(trace)
}
