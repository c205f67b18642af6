//! Planted-bias synthetic embeddings for desk-scale experiments.
//!
//! Every word gets an isotropic latent vector. Gendered pairs share a latent
//! vector and are pushed apart along a hidden unit direction `g` by
//! `bias_strength`; masculine/feminine stereotype words are shifted by
//! `±bias_strength · g`; the remaining words are neutral. Multi-source
//! generation reuses the same latent structure and adds independent
//! per-source noise.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::EmbeddingSet;
use crate::debias::GenderLexicon;
use crate::error::{Error, Result};
use crate::eval::WeatQuery;

/// Within-pair jitter, relative to the latent scale; keeps the defining-pair
/// covariance non-degenerate when `bias_strength == 0`.
const PAIR_JITTER: f64 = 0.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_words: usize,
    pub dim: usize,
    pub n_gendered_pairs: usize,
    pub bias_strength: f64,
    pub seed: u64,
    /// Standard deviation (relative to the latent scale) of source-specific
    /// noise added on top of the shared latent vectors.
    #[serde(default)]
    pub source_noise: f64,
}

impl SyntheticSpec {
    pub fn new(n_words: usize, dim: usize, n_gendered_pairs: usize, bias_strength: f64, seed: u64) -> Self {
        Self {
            n_words,
            dim,
            n_gendered_pairs,
            bias_strength,
            seed,
            source_noise: 0.0,
        }
    }

    pub fn with_source_noise(mut self, noise: f64) -> Self {
        self.source_noise = noise;
        self
    }
}

/// Generator output: the embedding, its lexicon, and the planted ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub set: EmbeddingSet,
    pub lexicon: GenderLexicon,
    /// Unit-norm planted bias direction.
    pub direction: Array1<f64>,
    pub male_stereotypes: Vec<String>,
    pub female_stereotypes: Vec<String>,
    pub neutral: Vec<String>,
}

impl SyntheticData {
    pub fn into_parts(self) -> (EmbeddingSet, GenderLexicon) {
        (self.set, self.lexicon)
    }

    /// Stereotype words with their planted sign (+1 masculine, -1 feminine).
    pub fn stereotypes(&self) -> impl Iterator<Item = (&str, f64)> {
        self.male_stereotypes
            .iter()
            .map(|w| (w.as_str(), 1.0))
            .chain(self.female_stereotypes.iter().map(|w| (w.as_str(), -1.0)))
    }
}

struct Layout {
    vocab: Vec<String>,
    // planted coefficient along g per word
    shift: Vec<f64>,
    // latent row shared by both members of a pair
    latent_of: Vec<usize>,
    jitter: Vec<bool>,
    pairs: Vec<(String, String)>,
    male: Vec<String>,
    female: Vec<String>,
    neutral: Vec<String>,
}

fn layout(spec: &SyntheticSpec) -> Result<Layout> {
    if spec.dim == 0 {
        return Err(Error::InvalidArgument("dim must be positive".into()));
    }
    if !(spec.bias_strength >= 0.0) || !spec.bias_strength.is_finite() {
        return Err(Error::InvalidArgument(
            "bias_strength must be a finite value >= 0".into(),
        ));
    }
    if !(spec.source_noise >= 0.0) || !spec.source_noise.is_finite() {
        return Err(Error::InvalidArgument(
            "source_noise must be a finite value >= 0".into(),
        ));
    }
    if spec.n_gendered_pairs * 2 > spec.n_words {
        return Err(Error::InvalidArgument(format!(
            "{} gendered pairs need {} words, only {} requested",
            spec.n_gendered_pairs,
            spec.n_gendered_pairs * 2,
            spec.n_words
        )));
    }
    let b = spec.bias_strength;
    let rest = spec.n_words - 2 * spec.n_gendered_pairs;
    let n_stereo = rest / 4;
    let n_neutral = rest - 2 * n_stereo;

    let mut l = Layout {
        vocab: Vec::with_capacity(spec.n_words),
        shift: Vec::with_capacity(spec.n_words),
        latent_of: Vec::with_capacity(spec.n_words),
        jitter: Vec::with_capacity(spec.n_words),
        pairs: Vec::new(),
        male: Vec::new(),
        female: Vec::new(),
        neutral: Vec::new(),
    };
    let mut latent = 0;
    let push = |l: &mut Layout, w: String, shift: f64, latent: usize, jitter: bool| {
        l.vocab.push(w);
        l.shift.push(shift);
        l.latent_of.push(latent);
        l.jitter.push(jitter);
    };
    for i in 0..spec.n_gendered_pairs {
        let (m, f) = (format!("m{i}"), format!("f{i}"));
        push(&mut l, m.clone(), b / 2.0, latent, true);
        push(&mut l, f.clone(), -b / 2.0, latent, true);
        latent += 1;
        l.pairs.push((m, f));
    }
    for i in 0..n_stereo {
        let w = format!("sm{i}");
        push(&mut l, w.clone(), b, latent, false);
        latent += 1;
        l.male.push(w);
    }
    for i in 0..n_stereo {
        let w = format!("sf{i}");
        push(&mut l, w.clone(), -b, latent, false);
        latent += 1;
        l.female.push(w);
    }
    for i in 0..n_neutral {
        let w = format!("n{i}");
        push(&mut l, w.clone(), 0.0, latent, false);
        latent += 1;
        l.neutral.push(w);
    }
    Ok(l)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || scale * rng.sample::<f64, _>(StandardNormal))
}

/// Generates `n_sources` embeddings over a shared planted structure.
///
/// Source `j` is `latent + planted + source_noise · ε_j` with independent
/// `ε_j`; all sources share the vocabulary, lexicon and planted direction.
/// With `n_sources == 1` this is exactly [`generate_synthetic`].
pub fn generate_synthetic_sources(spec: &SyntheticSpec, n_sources: usize) -> Result<Vec<SyntheticData>> {
    if n_sources == 0 {
        return Err(Error::InvalidArgument("n_sources must be at least 1".into()));
    }
    let l = layout(spec)?;
    let dim = spec.dim;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut g: Array1<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = g.dot(&g).sqrt();
    g /= norm;

    let n_latent = l.latent_of.last().map_or(0, |&x| x + 1);
    let latent = gaussian_matrix(&mut rng, n_latent, dim, scale);
    let jitter = gaussian_matrix(&mut rng, l.vocab.len(), dim, PAIR_JITTER * scale);
    let mut shared = Array2::zeros((l.vocab.len(), dim));
    for (w, mut row) in shared.rows_mut().into_iter().enumerate() {
        row.assign(&latent.row(l.latent_of[w]));
        row.scaled_add(l.shift[w], &g);
        if l.jitter[w] {
            row += &jitter.row(w);
        }
    }

    let query = WeatQuery {
        name: "planted".into(),
        x: l.male.clone(),
        y: l.female.clone(),
        a: l.pairs.iter().map(|p| p.0.clone()).collect(),
        b: l.pairs.iter().map(|p| p.1.clone()).collect(),
    };
    let lexicon = GenderLexicon {
        defining_pairs: l.pairs.clone(),
        seed_pairs: l.pairs.clone(),
        weat_queries: if query.x.is_empty() { vec![] } else { vec![query] },
        neutral_words: None,
    };

    (0..n_sources)
        .map(|j| {
            let mut m = shared.clone();
            if spec.source_noise > 0.0 {
                m += &gaussian_matrix(&mut rng, l.vocab.len(), dim, spec.source_noise * scale);
            }
            let name = if n_sources == 1 {
                format!("synthetic-{}", spec.seed)
            } else {
                format!("synthetic-{}-s{}", spec.seed, j + 1)
            };
            Ok(SyntheticData {
                set: EmbeddingSet::new(name, l.vocab.clone(), m)?,
                lexicon: lexicon.clone(),
                direction: g.clone(),
                male_stereotypes: l.male.clone(),
                female_stereotypes: l.female.clone(),
                neutral: l.neutral.clone(),
            })
        })
        .collect()
}

/// Generates one planted-bias embedding together with its gender lexicon.
/// Deterministic for a fixed `seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    Ok(generate_synthetic_sources(spec, 1)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::write_text;
    use crate::eval::weat;

    #[test]
    fn too_many_pairs() {
        let err = generate_synthetic(&SyntheticSpec::new(10, 4, 6, 1.0, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        let err = generate_synthetic(&SyntheticSpec::new(10, 4, 2, -1.0, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn fixed_seed_is_byte_identical() {
        let spec = SyntheticSpec::new(60, 8, 5, 1.0, 42).with_source_noise(0.5);
        let dump = |d: &SyntheticData| {
            let mut buf = Vec::new();
            write_text(&d.set, &mut buf).unwrap();
            buf
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(dump(&a), dump(&b));
        assert_eq!(a.lexicon, b.lexicon);
        let c = generate_synthetic(&SyntheticSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(dump(&a), dump(&c));
    }

    #[test]
    fn stereotypes_project_onto_planted_direction() {
        let mut hits = 0;
        let mut total = 0;
        for seed in 0..10 {
            let d = generate_synthetic(&SyntheticSpec::new(200, 10, 20, 1.0, seed)).unwrap();
            for (w, sign) in d.stereotypes() {
                total += 1;
                if sign * d.set.lookup(w).unwrap().dot(&d.direction) > 0.0 {
                    hits += 1;
                }
            }
        }
        assert!(hits as f64 >= 0.95 * total as f64, "{hits}/{total}");
    }

    #[test]
    fn unbiased_generator_has_small_weat_effect() {
        let effects: Vec<f64> = (0..20)
            .map(|seed| {
                let d = generate_synthetic(&SyntheticSpec::new(200, 10, 20, 0.0, seed)).unwrap();
                let q = &d.lexicon.weat_queries[0];
                weat(&d.set, q, 100, seed).unwrap().effect_size
            })
            .collect();
        let mean = effects.iter().sum::<f64>() / effects.len() as f64;
        assert!((-0.5..=0.5).contains(&mean), "mean effect {mean}");
    }

    #[test]
    fn layout_counts() {
        let d = generate_synthetic(&SyntheticSpec::new(200, 10, 20, 1.0, 1)).unwrap();
        assert_eq!(d.set.len(), 200);
        assert_eq!(d.lexicon.defining_pairs.len(), 20);
        assert_eq!(d.male_stereotypes.len(), 40);
        assert_eq!(d.female_stereotypes.len(), 40);
        assert_eq!(d.neutral.len(), 80);
        assert!((d.direction.dot(&d.direction) - 1.0).abs() < 1e-12);
    }
}
