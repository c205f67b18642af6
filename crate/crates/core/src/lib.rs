//! Meta-embedding learning, debiasing, and gender-bias evaluation for static
//! word embeddings.
//!
//! The crate is organised around [`EmbeddingSet`], an immutable vocabulary plus
//! dense vector table. Everything else consumes or produces embedding sets:
//!
//! - [`embedding`]: text-format I/O, vocabulary alignment, synthetic data.
//! - [`numerics`]: eigen/SVD kernels, logistic regression, a small training
//!   harness, gradient checking and correlation statistics.
//! - [`meta`]: CONC, AVG, GLE, LLE and AEME meta-embedding learners.
//! - [`debias`]: hard-debiasing, iterative null-space projection and
//!   dictionary-based debiasing, plus the concatenation/averaging
//!   preservation check.
//! - [`eval`]: WEAT, WAT, SemBias and word-similarity benchmarks.
//! - [`pipeline`]: the MSND / MSSD / SSMD regimes and report emission.
//! - [`plot`]: deterministic SVG scatter plots of report metrics.

pub mod debias;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod meta;
pub mod numerics;
pub mod pipeline;
pub mod plot;

pub use embedding::{AlignPolicy, AlignedSources, EmbeddingSet};
pub use error::{Error, Result};
