//! Word Embedding Association Test.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::{cosine, mean};

/// Splits of `X ∪ Y` are enumerated exhaustively up to this many.
pub const EXACT_ENUMERATION_LIMIT: u64 = 20_000;

/// Two equal-size target sets and two attribute sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatQuery {
    pub name: String,
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Y")]
    pub y: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
}

impl WeatQuery {
    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.x.len() != self.y.len() {
            return Err(Error::InvalidArgument(format!(
                "query {}: target sets must be non-empty and equal in size ({} vs {})",
                self.name,
                self.x.len(),
                self.y.len()
            )));
        }
        if self.a.is_empty() || self.b.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "query {}: empty attribute set",
                self.name
            )));
        }
        let xs: HashSet<&String> = self.x.iter().collect();
        if self.y.iter().any(|w| xs.contains(w)) {
            return Err(Error::InvalidArgument(format!("query {}: X and Y overlap", self.name)));
        }
        Ok(())
    }

    /// The same query with `X` and `Y` exchanged.
    pub fn swap_targets(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
            ..self.clone()
        }
    }

    /// The same query with `A` and `B` exchanged.
    pub fn swap_attributes(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            ..self.clone()
        }
    }

    fn tokens(&self) -> impl Iterator<Item = &String> {
        self.x.iter().chain(&self.y).chain(&self.a).chain(&self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatResult {
    pub effect_size: f64,
    pub p_value: f64,
    pub s_score: f64,
    /// Whether `p_value` came from full enumeration rather than sampling.
    pub exact: bool,
    pub n_splits: u64,
}

/// Binomial coefficient, saturating at `u64::MAX`.
fn choose(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

/// `mean_a cos(t, a) − mean_b cos(t, b)` for every target row.
fn associations(set: &EmbeddingSet, targets: &[usize], a: &[usize], b: &[usize]) -> Vec<f64> {
    let assoc = |t: usize, attrs: &[usize]| {
        attrs.iter().map(|&i| cosine(set.row(t), set.row(i))).sum::<f64>() / attrs.len() as f64
    };
    targets.iter().map(|&t| assoc(t, a) - assoc(t, b)).collect()
}

/// Sample standard deviation of `x ∪ y`, accumulated per block so that
/// swapping the blocks gives a bit-identical result.
fn pooled_sd(x: &[f64], y: &[f64]) -> f64 {
    let n = (x.len() + y.len()) as f64;
    let m = (x.iter().sum::<f64>() + y.iter().sum::<f64>()) / n;
    let ss = |v: &[f64]| v.iter().map(|k| (k - m) * (k - m)).sum::<f64>();
    ((ss(x) + ss(y)) / (n - 1.0)).sqrt()
}

/// `Σ_{i∈first} k_i − Σ_{i∉first} k_i`, summing in index order so that equal
/// splits give bit-identical statistics.
fn split_statistic(k: &[f64], first: &[usize]) -> f64 {
    let mut in_first = vec![false; k.len()];
    for &i in first {
        in_first[i] = true;
    }
    let (mut sx, mut sy) = (0.0, 0.0);
    for (i, v) in k.iter().enumerate() {
        if in_first[i] {
            sx += v;
        } else {
            sy += v;
        }
    }
    sx - sy
}

pub fn weat(set: &EmbeddingSet, q: &WeatQuery, n_permutations: usize, seed: u64) -> Result<WeatResult> {
    q.validate()?;
    let mut missing: Vec<String> = Vec::new();
    for w in q.tokens() {
        if !set.contains(w) && !missing.contains(w) {
            missing.push(w.clone());
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingWords(missing));
    }
    let idx = |ws: &[String]| -> Vec<usize> { ws.iter().map(|w| set.index_of(w).expect("resolved")).collect() };
    let targets: Vec<usize> = idx(&q.x).into_iter().chain(idx(&q.y)).collect();
    let k = associations(set, &targets, &idx(&q.a), &idx(&q.b));
    let nx = q.x.len();

    let sd = pooled_sd(&k[..nx], &k[nx..]);
    if !(sd > 0.0) {
        return Err(Error::DegenerateEffect);
    }
    let effect_size = (mean(&k[..nx]) - mean(&k[nx..])) / sd;
    let observed: Vec<usize> = (0..nx).collect();
    let s_score = split_statistic(&k, &observed);

    let total = choose(k.len(), nx);
    let (greater, n_splits, exact) = if total <= EXACT_ENUMERATION_LIMIT {
        let greater = (0..k.len())
            .combinations(nx)
            .filter(|c| split_statistic(&k, c) > s_score)
            .count();
        (greater as u64, total, true)
    } else {
        if n_permutations == 0 {
            return Err(Error::InvalidArgument("n_permutations must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..k.len()).collect();
        let mut greater = 0u64;
        for _ in 0..n_permutations {
            order.shuffle(&mut rng);
            if split_statistic(&k, &order[..nx]) > s_score {
                greater += 1;
            }
        }
        (greater, n_permutations as u64, false)
    };

    Ok(WeatResult {
        effect_size,
        p_value: greater as f64 / n_splits as f64,
        s_score,
        exact,
        n_splits,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum QueryFile {
    Many(Vec<WeatQuery>),
    One(WeatQuery),
    Lexicon { weat_queries: Vec<WeatQuery> },
}

/// Reads WEAT queries from JSON holding a single query, an array of
/// queries, or an object with a `weat_queries` array (a gender lexicon).
pub fn load_weat_queries(path: impl AsRef<Path>) -> Result<Vec<WeatQuery>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: QueryFile = serde_json::from_str(&text).map_err(|e| Error::Json {
        context: path.display().to_string(),
        source: e,
    })?;
    Ok(match parsed {
        QueryFile::Many(q) | QueryFile::Lexicon { weat_queries: q } => q,
        QueryFile::One(q) => vec![q],
    })
}

/// Mean absolute effect size over `queries`, the figure reported for a
/// collection of gender queries.
pub fn weat_mean_abs_effect(
    set: &EmbeddingSet,
    queries: &[WeatQuery],
    n_permutations: usize,
    seed: u64,
) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::InvalidArgument("no WEAT queries".into()));
    }
    let mut total = 0.0;
    for q in queries {
        total += weat(set, q, n_permutations, seed)?.effect_size.abs();
    }
    Ok(total / queries.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn query(x: &[&str], y: &[&str], a: &[&str], b: &[&str]) -> WeatQuery {
        let v = |s: &[&str]| s.iter().map(|w| w.to_string()).collect();
        WeatQuery {
            name: "t".into(),
            x: v(x),
            y: v(y),
            a: v(a),
            b: v(b),
        }
    }

    fn toy() -> EmbeddingSet {
        EmbeddingSet::from_rows(
            "toy",
            [
                ("x1", vec![1.0, 0.2, 0.0]),
                ("x2", vec![0.9, -0.1, 0.3]),
                ("y1", vec![0.1, 1.0, 0.2]),
                ("y2", vec![-0.2, 0.8, 0.5]),
                ("a1", vec![1.0, 0.0, 0.1]),
                ("a2", vec![0.7, 0.1, -0.4]),
                ("b1", vec![0.0, 1.0, 0.0]),
                ("b2", vec![0.2, 0.6, 0.6]),
            ],
        )
        .unwrap()
    }

    /// Straight-line reimplementation over bitmask subsets.
    fn brute_force(set: &EmbeddingSet, q: &WeatQuery) -> (f64, f64) {
        let cos = |u: &str, v: &str| {
            let (a, b) = (set.get(u).unwrap(), set.get(v).unwrap());
            a.dot(&b) / (a.dot(&a).sqrt() * b.dot(&b).sqrt())
        };
        let k = |t: &str| {
            q.a.iter().map(|a| cos(t, a)).sum::<f64>() / q.a.len() as f64
                - q.b.iter().map(|b| cos(t, b)).sum::<f64>() / q.b.len() as f64
        };
        let all: Vec<f64> = q.x.iter().chain(&q.y).map(|t| k(t)).collect();
        let n = all.len();
        let m = all.iter().sum::<f64>() / n as f64;
        let sd = (all.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let nx = q.x.len();
        let mx = all[..nx].iter().sum::<f64>() / nx as f64;
        let my = all[nx..].iter().sum::<f64>() / nx as f64;
        let s_of = |mask: u32| -> f64 { (0..n).map(|i| if mask >> i & 1 == 1 { all[i] } else { -all[i] }).sum() };
        let observed = s_of((1 << nx) - 1);
        let (mut hits, mut total) = (0, 0);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == nx {
                total += 1;
                if s_of(mask) > observed + 1e-15 {
                    hits += 1;
                }
            }
        }
        ((mx - my) / sd, hits as f64 / total as f64)
    }

    #[test]
    fn identical_attribute_sets_are_degenerate() {
        let q = query(&["x1", "x2"], &["y1", "y2"], &["a1", "a2"], &["a1", "a2"]);
        assert!(matches!(weat(&toy(), &q, 100, 0), Err(Error::DegenerateEffect)));
    }

    #[test]
    fn matches_brute_force_oracle() {
        let q = query(&["x1", "x2"], &["y1", "y2"], &["a1", "a2"], &["b1", "b2"]);
        let r = weat(&toy(), &q, 100, 0).unwrap();
        let (effect, p) = brute_force(&toy(), &q);
        assert!(r.exact);
        assert_eq!(r.n_splits, 6);
        assert!((r.effect_size - effect).abs() <= 1e-12);
        assert!((r.p_value - p).abs() <= 1e-12);
    }

    #[test]
    fn random_queries_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let rows: Vec<(String, Vec<f64>)> = (0..12)
                .map(|i| (format!("w{i}"), (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()))
                .collect();
            let set = EmbeddingSet::from_rows("r", rows).unwrap();
            let q = query(
                &["w0", "w1", "w2"],
                &["w3", "w4", "w5"],
                &["w6", "w7", "w8"],
                &["w9", "w10", "w11"],
            );
            let r = weat(&set, &q, 0, 0).unwrap();
            let (effect, p) = brute_force(&set, &q);
            assert!((r.effect_size - effect).abs() <= 1e-12);
            assert!((r.p_value - p).abs() <= 1e-12);
        }
    }

    #[test]
    fn swapping_negates_exactly() {
        let q = query(&["x1", "x2"], &["y1", "y2"], &["a1", "a2"], &["b1", "b2"]);
        let set = toy();
        let r = weat(&set, &q, 100, 0).unwrap();
        let rx = weat(&set, &q.swap_targets(), 100, 0).unwrap();
        let ra = weat(&set, &q.swap_attributes(), 100, 0).unwrap();
        assert_eq!(rx.s_score, -r.s_score);
        assert_eq!(rx.effect_size, -r.effect_size);
        assert_eq!(ra.s_score, -r.s_score);
        assert_eq!(ra.effect_size, -r.effect_size);
    }

    #[test]
    fn missing_words_are_listed() {
        let q = query(&["x1", "zz"], &["y1", "y2"], &["a1", "qq"], &["b1", "zz"]);
        match weat(&toy(), &q, 100, 0) {
            Err(Error::MissingWords(w)) => assert_eq!(w, vec!["zz".to_string(), "qq".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        // C(16, 8) = 12870 splits: enumerable, and large enough to sample.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<(String, Vec<f64>)> = (0..20)
            .map(|i| (format!("w{i}"), (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let set = EmbeddingSet::from_rows("r", rows).unwrap();
        let names: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
        let q = WeatQuery {
            name: "mc".into(),
            x: names[0..8].to_vec(),
            y: names[8..16].to_vec(),
            a: names[16..18].to_vec(),
            b: names[18..20].to_vec(),
        };
        let exact = weat(&set, &q, 0, 0).unwrap();
        assert!(exact.exact);

        // Sample directly with the same statistic, since the public entry
        // point only samples above the enumeration limit.
        let idx: Vec<usize> = (0..16).collect();
        let k = associations(&set, &idx, &[16, 17], &[18, 19]);
        let n = 10_000;
        let mut order = idx.clone();
        let mut hits = 0;
        for _ in 0..n {
            order.shuffle(&mut rng);
            if split_statistic(&k, &order[..8]) > exact.s_score {
                hits += 1;
            }
        }
        let p_mc = hits as f64 / n as f64;
        let sigma = (exact.p_value * (1.0 - exact.p_value) / n as f64)
            .sqrt()
            .max(1.0 / n as f64);
        assert!(
            (p_mc - exact.p_value).abs() <= 3.0 * sigma,
            "{p_mc} vs {}",
            exact.p_value
        );
    }

    #[test]
    fn large_queries_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<(String, Vec<f64>)> = (0..24)
            .map(|i| (format!("w{i}"), (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let set = EmbeddingSet::from_rows("r", rows).unwrap();
        let names: Vec<String> = (0..24).map(|i| format!("w{i}")).collect();
        let q = WeatQuery {
            name: "big".into(),
            x: names[0..10].to_vec(),
            y: names[10..20].to_vec(),
            a: names[20..22].to_vec(),
            b: names[22..24].to_vec(),
        };
        let r1 = weat(&set, &q, 500, 3).unwrap();
        let r2 = weat(&set, &q, 500, 3).unwrap();
        assert!(!r1.exact);
        assert_eq!(r1.n_splits, 500);
        assert_eq!(r1, r2);
    }

    #[test]
    fn query_file_forms() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.json");
        let one = r#"{"name": "T4", "X": ["a"], "Y": ["b"], "A": ["c"], "B": ["d"]}"#;
        for (text, n) in [
            (one.to_string(), 1),
            (format!("[{one}, {one}]"), 2),
            (format!(r#"{{"defining_pairs": [], "weat_queries": [{one}]}}"#), 1),
        ] {
            fs::write(&path, text).unwrap();
            assert_eq!(load_weat_queries(&path).unwrap().len(), n);
        }
        fs::write(&path, "{").unwrap();
        assert!(matches!(load_weat_queries(&path), Err(Error::Json { .. })));
    }

    #[test]
    fn choose_values() {
        assert_eq!(choose(4, 2), 6);
        assert_eq!(choose(16, 8), 12870);
        assert_eq!(choose(20, 10), 184_756);
    }
}
