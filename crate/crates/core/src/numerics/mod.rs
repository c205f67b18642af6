//! Numerical kernels shared by the learners, debiasers and evaluators.

mod dense;
mod gradcheck;
mod linalg;
mod logistic;
mod optim;
mod stats;

pub use dense::{Activation, Dense};
pub use gradcheck::{grad_check, objective_grad_check, GRAD_CHECK_STEP};
pub use linalg::{frobenius, orthonormality_error, solve_psd, svd, sym_eigen, top_right_singular, Spectrum, Svd};
pub use logistic::{fit_logistic, fit_logistic_trace, LinearClassifier, DEFAULT_L2};
pub use optim::{minimize, Method, Objective, OptimizerConfig, Trace};
pub use stats::{cosine, mean, pearson, ranks, sample_sd, spearman};
