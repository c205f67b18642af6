//! Bias and semantic-quality evaluators.

mod sembias;
mod similarity;
mod wat;
mod weat;

pub use sembias::{load_sembias, sembias, sembias_choice, sembias_subset, SemBiasInstance, SemBiasResult};
pub use similarity::{similarity_benchmark, SimilarityDataset, SimilarityResult};
pub use wat::{
    embedding_bias, graph_bias, wat_propagate, wat_score, Propagation, WatGraph, WatResult, DEFAULT_DAMPING,
    DEFAULT_EPS, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE,
};
pub use weat::{load_weat_queries, weat, weat_mean_abs_effect, WeatQuery, WeatResult, EXACT_ENUMERATION_LIMIT};
