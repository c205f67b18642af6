use ndarray::{Array1, Array2, ArrayView1};

use super::optim::{minimize, Method, Objective, OptimizerConfig};
use crate::error::{Error, Result};

/// Default L2 penalty on the weights (the bias is not penalised).
pub const DEFAULT_L2: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: Array1<f64>,
    pub bias: f64,
}

impl LinearClassifier {
    pub fn decision(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.weights.dot(&x) + self.bias
    }

    /// `+1` when the decision value is non-negative, else `-1`.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        if self.decision(x) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn accuracy(&self, x: &Array2<f64>, y: &[f64]) -> f64 {
        let hits = x
            .rows()
            .into_iter()
            .zip(y)
            .filter(|(row, &label)| self.predict(*row) == label)
            .count();
        hits as f64 / y.len().max(1) as f64
    }
}

impl OptimizerConfig {
    /// Full-batch gradient descent settings used for bias classifiers.
    pub fn logistic_default() -> Self {
        OptimizerConfig {
            method: Method::Sgd,
            learning_rate: 1.0,
            epochs: 500,
            batch_size: usize::MAX,
            seed: 0,
            tolerance: 1e-12,
        }
    }
}

struct Logistic<'a> {
    x: &'a Array2<f64>,
    y: &'a [f64],
    l2: f64,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Objective for Logistic<'_> {
    fn n_examples(&self) -> usize {
        self.y.len()
    }

    // mean log-loss + (l2/2)‖w‖², scaled by n
    fn loss_grad(&self, theta: &[f64], batch: &[usize], grad: &mut [f64]) -> f64 {
        let d = self.x.ncols();
        let (w, b) = (&theta[..d], theta[d]);
        let mut loss = 0.0;
        for &i in batch {
            let row = self.x.row(i);
            let z: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            let margin = -self.y[i] * z;
            loss += softplus(margin);
            let g = -self.y[i] * sigmoid(margin);
            for (gk, xk) in grad[..d].iter_mut().zip(row) {
                *gk += g * xk;
            }
            grad[d] += g;
        }
        let m = batch.len() as f64;
        let wsq: f64 = w.iter().map(|v| v * v).sum();
        loss += m * 0.5 * self.l2 * wsq;
        for (gk, wk) in grad[..d].iter_mut().zip(w) {
            *gk += m * self.l2 * wk;
        }
        loss
    }
}

/// Fits an L2-penalised logistic regression on `±1` labels and returns the
/// classifier with its per-epoch training losses.
pub fn fit_logistic_trace(
    x: &Array2<f64>,
    y: &[f64],
    cfg: &OptimizerConfig,
    l2: f64,
) -> Result<(LinearClassifier, Vec<f64>)> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
    }
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::DegenerateLabels);
    }
    let obj = Logistic { x, y, l2 };
    let d = x.ncols();
    let mut theta = vec![0.0; d + 1];
    let trace = minimize(&obj, &mut theta, cfg)?;
    let clf = LinearClassifier {
        weights: Array1::from(theta[..d].to_vec()),
        bias: theta[d],
    };
    if !clf.weights.iter().all(|v| v.is_finite()) || !clf.bias.is_finite() {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    Ok((clf, trace.losses))
}

/// Fits a logistic-regression classifier with the default L2 penalty.
pub fn fit_logistic(x: &Array2<f64>, y: &[f64], cfg: &OptimizerConfig) -> Result<LinearClassifier> {
    fit_logistic_trace(x, y, cfg, DEFAULT_L2).map(|(c, _)| c)
}
