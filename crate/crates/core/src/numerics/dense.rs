//! Single affine layer with an optional `tanh`, flattened to and from a
//! parameter slice (weights row-major, then bias) for use with [`super::minimize`].

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out × in`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    /// Weights and bias drawn from `uniform(−1/√in, 1/√in)`.
    pub fn uniform(inputs: usize, outputs: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (inputs.max(1) as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((outputs, inputs), || rng.random_range(-bound..bound));
        let bias = (0..outputs).map(|_| rng.random_range(-bound..bound)).collect();
        Self {
            weights,
            bias,
            activation,
        }
    }

    /// Identity weights, zero bias.
    pub fn identity(dim: usize, activation: Activation) -> Self {
        Self {
            weights: Array2::eye(dim),
            bias: Array1::zeros(dim),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn param_count(inputs: usize, outputs: usize) -> usize {
        inputs * outputs + outputs
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        out.extend(self.weights.iter());
        out.extend(self.bias.iter());
    }

    /// Reads a layer from the front of `theta`; returns it with the remainder.
    pub fn read_params(inputs: usize, outputs: usize, activation: Activation, theta: &[f64]) -> (Self, &[f64]) {
        let nw = inputs * outputs;
        let weights = Array2::from_shape_vec((outputs, inputs), theta[..nw].to_vec()).expect("sized slice");
        let bias = Array1::from(theta[nw..nw + outputs].to_vec());
        (
            Self {
                weights,
                bias,
                activation,
            },
            &theta[nw + outputs..],
        )
    }

    pub fn forward(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let z = self.weights.dot(&x) + &self.bias;
        match self.activation {
            Activation::Identity => z,
            Activation::Tanh => z.mapv(f64::tanh),
        }
    }

    /// Back-propagates `dy` (gradient w.r.t. the output `y = forward(x)`),
    /// accumulating parameter gradients into `grad` (same packing as
    /// [`Self::write_params`]) and returning the gradient w.r.t. `x`.
    pub fn backward(
        &self,
        x: ArrayView1<'_, f64>,
        y: ArrayView1<'_, f64>,
        dy: ArrayView1<'_, f64>,
        grad: &mut [f64],
    ) -> Array1<f64> {
        let dz: Array1<f64> = match self.activation {
            Activation::Identity => dy.to_owned(),
            Activation::Tanh => &dy * &y.mapv(|v| 1.0 - v * v),
        };
        let (n_out, n_in) = self.weights.dim();
        for o in 0..n_out {
            let d = dz[o];
            if d != 0.0 {
                let row = &mut grad[o * n_in..(o + 1) * n_in];
                for (g, xi) in row.iter_mut().zip(x.iter()) {
                    *g += d * xi;
                }
            }
        }
        for (g, d) in grad[n_out * n_in..n_out * n_in + n_out].iter_mut().zip(dz.iter()) {
            *g += d;
        }
        self.weights.t().dot(&dz)
    }
}
