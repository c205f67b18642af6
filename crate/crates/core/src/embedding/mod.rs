//! Embedding tables: storage, text I/O, vocabulary alignment and a synthetic
//! biased-embedding generator.

mod align;
mod io;
mod set;
mod synthetic;

pub use align::{align, AlignPolicy, AlignedSources};
pub use io::{load_text, read_text, save_text, write_text};
pub use set::EmbeddingSet;
pub use synthetic::{generate_synthetic, generate_synthetic_sources, SyntheticData, SyntheticSpec};
