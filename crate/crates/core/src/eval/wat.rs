//! Word Association Test: label propagation of gender over a word
//! association graph, correlated with embedding-side gender scores.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::{cosine, pearson};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;
pub const DEFAULT_EPS: f64 = 1e-12;

/// Undirected weighted graph with masculine/feminine seed pairs.
#[derive(Debug, Clone)]
pub struct WatGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Symmetric adjacency lists; parallel edges are merged by summing.
    adjacency: Vec<Vec<(usize, f64)>>,
    seeds: Vec<(String, String)>,
}

impl WatGraph {
    /// Builds a graph from `(u, v, weight)` edges. Seed words not mentioned by
    /// any edge become isolated nodes.
    pub fn new<S: AsRef<str>>(edges: &[(S, S, f64)], seeds: Vec<(String, String)>) -> Result<Self> {
        let mut g = WatGraph {
            nodes: Vec::new(),
            index: HashMap::new(),
            adjacency: Vec::new(),
            seeds: Vec::new(),
        };
        let mut merged: Vec<BTreeMap<usize, f64>> = Vec::new();
        for (u, v, w) in edges {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge {}–{} has invalid weight {w}",
                    u.as_ref(),
                    v.as_ref()
                )));
            }
            let (i, j) = (g.intern(u.as_ref(), &mut merged), g.intern(v.as_ref(), &mut merged));
            *merged[i].entry(j).or_default() += w;
            if i != j {
                *merged[j].entry(i).or_default() += w;
            }
        }
        for (m, f) in &seeds {
            if m == f {
                return Err(Error::InvalidArgument(format!("seed pair uses `{m}` for both genders")));
            }
            g.intern(m, &mut merged);
            g.intern(f, &mut merged);
        }
        g.adjacency = merged.into_iter().map(|m| m.into_iter().collect()).collect();
        g.seeds = seeds;
        Ok(g)
    }

    fn intern(&mut self, w: &str, merged: &mut Vec<BTreeMap<usize, f64>>) -> usize {
        if let Some(&i) = self.index.get(w) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(w.to_string());
        self.index.insert(w.to_string(), i);
        merged.push(BTreeMap::new());
        i
    }

    /// Reads a `u<TAB>v<TAB>weight` edge list and a JSON array of
    /// `[masculine, feminine]` seed pairs.
    pub fn load(edges: impl AsRef<Path>, seeds: impl AsRef<Path>) -> Result<Self> {
        let edges = edges.as_ref();
        let text = fs::read_to_string(edges).map_err(|e| Error::io(edges, e))?;
        let mut list = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(
                    edges.display().to_string(),
                    n + 1,
                    format!("expected 3 columns, found {}", cols.len()),
                ));
            }
            let w: f64 = cols[2]
                .trim()
                .parse()
                .map_err(|_| Error::parse(edges.display().to_string(), n + 1, format!("bad weight `{}`", cols[2])))?;
            list.push((cols[0].trim().to_string(), cols[1].trim().to_string(), w));
        }
        let seeds_path = seeds.as_ref();
        let text = fs::read_to_string(seeds_path).map_err(|e| Error::io(seeds_path, e))?;
        let seeds: Vec<(String, String)> = serde_json::from_str(&text).map_err(|e| Error::Json {
            context: seeds_path.display().to_string(),
            source: e,
        })?;
        Self::new(&list, seeds)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn seeds(&self) -> &[(String, String)] {
        &self.seeds
    }

    pub fn index_of(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn seed_words(&self) -> HashSet<&str> {
        self.seeds.iter().flat_map(|(m, f)| [m.as_str(), f.as_str()]).collect()
    }

    /// Initial label matrix: masculine seeds `(1, 0)`, feminine `(0, 1)`.
    fn labels(&self) -> Vec<[f64; 2]> {
        let mut y = vec![[0.0; 2]; self.len()];
        for (m, f) in &self.seeds {
            y[self.index[m]][0] = 1.0;
            y[self.index[f]][1] = 1.0;
        }
        y
    }

    /// Entries of `D^{-1/2} W D^{-1/2}` in adjacency order.
    fn normalized(&self) -> Vec<Vec<(usize, f64)>> {
        let deg: Vec<f64> = self.adjacency.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
        self.adjacency
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .filter(|&&(j, w)| w > 0.0 && deg[i] > 0.0 && deg[j] > 0.0)
                    .map(|&(j, w)| (j, w / (deg[i] * deg[j]).sqrt()))
                    .collect()
            })
            .collect()
    }
}

/// Propagated masculine/feminine mass per node.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub scores: BTreeMap<String, (f64, f64)>,
    pub iterations: usize,
    /// `‖ΔF‖_∞` after each iteration.
    pub residuals: Vec<f64>,
}

pub fn wat_propagate(g: &WatGraph, alpha: f64, tol: f64, max_iters: usize) -> Result<Propagation> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1), got {alpha}"
        )));
    }
    let s = g.normalized();
    let y = g.labels();
    let mut f = y.clone();
    let mut residuals = Vec::new();
    for _ in 0..max_iters {
        let mut next = vec![[0.0; 2]; g.len()];
        let mut residual = 0.0f64;
        for i in 0..g.len() {
            let mut acc = [0.0; 2];
            for &(j, w) in &s[i] {
                acc[0] += w * f[j][0];
                acc[1] += w * f[j][1];
            }
            for c in 0..2 {
                next[i][c] = alpha * acc[c] + (1.0 - alpha) * y[i][c];
                residual = residual.max((next[i][c] - f[i][c]).abs());
            }
        }
        f = next;
        residuals.push(residual);
        if residual <= tol {
            let scores = g.nodes.iter().cloned().zip(f.iter().map(|r| (r[0], r[1]))).collect();
            return Ok(Propagation {
                scores,
                iterations: residuals.len(),
                residuals,
            });
        }
    }
    Err(Error::NonConvergence {
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatResult {
    pub correlation: f64,
    pub n_scored: usize,
    /// Graph words left out: seed words, words with no propagated mass, and
    /// words missing from the embedding.
    pub n_skipped: usize,
}

/// `log((b_m + eps) / (b_f + eps))`.
pub fn graph_bias(bm: f64, bf: f64, eps: f64) -> f64 {
    ((bm + eps) / (bf + eps)).ln()
}

/// Mean over seed pairs of `cos(w, m_i) − cos(w, f_i)`, using only pairs
/// with both words in the embedding.
pub fn embedding_bias(set: &EmbeddingSet, word: &str, seeds: &[(usize, usize)]) -> Option<f64> {
    let v = set.get(word)?;
    if seeds.is_empty() {
        return None;
    }
    let total: f64 = seeds
        .iter()
        .map(|&(m, f)| cosine(v, set.row(m)) - cosine(v, set.row(f)))
        .sum();
    Some(total / seeds.len() as f64)
}

pub fn wat_score(set: &EmbeddingSet, g: &WatGraph, props: &Propagation, eps: f64) -> Result<WatResult> {
    let seeds: Vec<(usize, usize)> = g
        .seeds
        .iter()
        .filter_map(|(m, f)| Some((set.index_of(m)?, set.index_of(f)?)))
        .collect();
    let seed_words = g.seed_words();
    let (mut graph_scores, mut emb_scores) = (Vec::new(), Vec::new());
    let mut skipped = 0;
    for (word, &(bm, bf)) in &props.scores {
        let score = if seed_words.contains(word.as_str()) || bm + bf == 0.0 {
            None
        } else {
            embedding_bias(set, word, &seeds)
        };
        match score {
            Some(e) => {
                graph_scores.push(graph_bias(bm, bf, eps));
                emb_scores.push(e);
            }
            None => skipped += 1,
        }
    }
    if graph_scores.len() < 2 {
        return Err(Error::InsufficientOverlap(graph_scores.len()));
    }
    Ok(WatResult {
        correlation: pearson(&graph_scores, &emb_scores)?,
        n_scored: graph_scores.len(),
        n_skipped: skipped,
    })
}
