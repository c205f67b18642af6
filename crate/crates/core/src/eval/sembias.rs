//! SemBias analogy-style gender bias test.

use std::fs;
use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::cosine;

/// Four candidate pairs; the definition pair is the only correct answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemBiasInstance {
    pub definition: (String, String),
    pub stereotype: (String, String),
    pub none_1: (String, String),
    pub none_2: (String, String),
    /// Member of the designated subset (marked in an optional ninth column).
    #[serde(default)]
    pub in_subset: bool,
}

impl SemBiasInstance {
    fn pairs(&self) -> [&(String, String); 4] {
        [&self.definition, &self.stereotype, &self.none_1, &self.none_2]
    }
}

/// Reads one instance per line: eight tab-separated tokens in the order
/// definition, stereotype, none, none, then an optional subset marker
/// (`1`/`true`/`subset` select the instance).
pub fn load_sembias(path: impl AsRef<Path>) -> Result<Vec<SemBiasInstance>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 8 && cols.len() != 9 {
            return Err(Error::parse(
                path.display().to_string(),
                n + 1,
                format!("expected 8 or 9 columns, found {}", cols.len()),
            ));
        }
        let pair = |i: usize| (cols[i].to_string(), cols[i + 1].to_string());
        let in_subset = match cols.get(8).copied() {
            None | Some("") | Some("0") | Some("false") => false,
            Some("1") | Some("true") | Some("subset") => true,
            Some(other) => {
                return Err(Error::parse(
                    path.display().to_string(),
                    n + 1,
                    format!("bad subset marker `{other}`"),
                ))
            }
        };
        out.push(SemBiasInstance {
            definition: pair(0),
            stereotype: pair(2),
            none_1: pair(4),
            none_2: pair(6),
            in_subset,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemBiasResult {
    pub definition_pct: f64,
    pub stereotype_pct: f64,
    pub none_pct: f64,
    pub n_scored: usize,
    pub n_skipped: usize,
}

/// Index into `[definition, stereotype, none_1, none_2]` of the pair whose
/// difference vector is most aligned with `direction`; ties go to the lower
/// index. `None` when a token is missing.
pub fn sembias_choice(set: &EmbeddingSet, inst: &SemBiasInstance, direction: &Array1<f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (a, b)) in inst.pairs().into_iter().enumerate() {
        let diff = &set.get(a)? - &set.get(b)?;
        let c = cosine(direction.view(), diff.view());
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((i, c));
        }
    }
    best.map(|b| b.0)
}

pub fn sembias(
    set: &EmbeddingSet,
    instances: &[SemBiasInstance],
    direction_pair: (&str, &str),
) -> Result<SemBiasResult> {
    let direction = &set.lookup(direction_pair.0)? - &set.lookup(direction_pair.1)?;
    let mut counts = [0usize; 3];
    let mut skipped = 0;
    for inst in instances {
        match sembias_choice(set, inst, &direction) {
            Some(0) => counts[0] += 1,
            Some(1) => counts[1] += 1,
            Some(_) => counts[2] += 1,
            None => skipped += 1,
        }
    }
    let scored: usize = counts.iter().sum();
    if scored == 0 {
        return Err(Error::NoScorableInstances);
    }
    let pct = |c: usize| 100.0 * c as f64 / scored as f64;
    Ok(SemBiasResult {
        definition_pct: pct(counts[0]),
        stereotype_pct: pct(counts[1]),
        none_pct: pct(counts[2]),
        n_scored: scored,
        n_skipped: skipped,
    })
}

/// SemBias restricted to instances flagged as subset members.
pub fn sembias_subset(
    set: &EmbeddingSet,
    instances: &[SemBiasInstance],
    direction_pair: (&str, &str),
) -> Result<SemBiasResult> {
    let subset: Vec<SemBiasInstance> = instances.iter().filter(|i| i.in_subset).cloned().collect();
    sembias(set, &subset, direction_pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    fn instance(i: usize) -> SemBiasInstance {
        SemBiasInstance {
            definition: p(&format!("d{i}a"), &format!("d{i}b")),
            stereotype: p(&format!("s{i}a"), &format!("s{i}b")),
            none_1: p(&format!("n{i}a"), &format!("n{i}b")),
            none_2: p(&format!("m{i}a"), &format!("m{i}b")),
            in_subset: false,
        }
    }

    #[test]
    fn definition_aligned_with_direction() {
        let set = EmbeddingSet::from_rows(
            "s",
            [
                ("he", vec![1.0, 0.0, 0.0]),
                ("she", vec![-1.0, 0.0, 0.0]),
                ("d0a", vec![2.0, 0.0, 0.0]),
                ("d0b", vec![0.0, 0.0, 0.0]),
                ("s0a", vec![0.0, 1.0, 0.0]),
                ("s0b", vec![0.0, 0.0, 0.0]),
                ("n0a", vec![0.0, 0.0, 1.0]),
                ("n0b", vec![0.0, 0.0, 0.0]),
                ("m0a", vec![0.0, 1.0, 1.0]),
                ("m0b", vec![0.0, 0.0, 0.0]),
            ],
        )
        .unwrap();
        let r = sembias(&set, &[instance(0)], ("he", "she")).unwrap();
        assert_eq!(r.definition_pct, 100.0);
        assert_eq!(r.stereotype_pct, 0.0);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let set = EmbeddingSet::from_rows(
            "s",
            [
                ("he", vec![1.0, 0.0]),
                ("she", vec![0.0, 0.0]),
                ("d0a", vec![0.0, 1.0]),
                ("d0b", vec![0.0, 0.0]),
                ("s0a", vec![1.0, 0.0]),
                ("s0b", vec![0.0, 0.0]),
                ("n0a", vec![2.0, 0.0]),
                ("n0b", vec![0.0, 0.0]),
                ("m0a", vec![0.0, 1.0]),
                ("m0b", vec![0.0, 0.0]),
            ],
        )
        .unwrap();
        let dir = &set.lookup("he").unwrap() - &set.lookup("she").unwrap();
        assert_eq!(sembias_choice(&set, &instance(0), &dir), Some(1));
    }

    fn random_setup(seed: u64, n: usize) -> (EmbeddingSet, Vec<SemBiasInstance>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let instances: Vec<SemBiasInstance> = (0..n).map(instance).collect();
        let mut words = vec!["he".to_string(), "she".to_string()];
        for inst in &instances {
            for (a, b) in inst.pairs() {
                words.push(a.clone());
                words.push(b.clone());
            }
        }
        let rows: Vec<(String, Vec<f64>)> = words
            .into_iter()
            .map(|w| {
                let v = (0..50)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect();
                (w, v)
            })
            .collect();
        (EmbeddingSet::from_rows("iso", rows).unwrap(), instances)
    }

    #[test]
    fn isotropic_embeddings_pick_uniformly() {
        let mut total = 0.0;
        for seed in 0..20 {
            let (set, instances) = random_setup(seed, 440);
            let r = sembias(&set, &instances, ("he", "she")).unwrap();
            assert!(((r.definition_pct + r.stereotype_pct + r.none_pct) - 100.0).abs() <= 1e-9);
            total += r.stereotype_pct + r.none_pct;
        }
        let mean = total / 20.0;
        assert!((mean - 75.0).abs() <= 7.0, "{mean}");
    }

    #[test]
    fn order_invariant() {
        let (set, mut instances) = random_setup(3, 60);
        let r = sembias(&set, &instances, ("he", "she")).unwrap();
        instances.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(r, sembias(&set, &instances, ("he", "she")).unwrap());
    }

    #[test]
    fn unscorable() {
        let set = EmbeddingSet::from_rows("s", [("he", vec![1.0]), ("she", vec![-1.0])]).unwrap();
        assert!(matches!(
            sembias(&set, &[instance(0)], ("he", "she")),
            Err(Error::NoScorableInstances)
        ));
        assert!(matches!(
            sembias(&set, &[instance(0)], ("he", "her")),
            Err(Error::OutOfVocabulary(_))
        ));
    }

    #[test]
    fn loads_with_and_without_marker() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sb.tsv");
        fs::write(&path, "a\tb\tc\td\te\tf\tg\th\na\tb\tc\td\te\tf\tg\th\t1\n").unwrap();
        let inst = load_sembias(&path).unwrap();
        assert_eq!(inst.len(), 2);
        assert!(!inst[0].in_subset && inst[1].in_subset);
        assert_eq!(inst[0].stereotype, p("c", "d"));
        fs::write(&path, "a\tb\tc\n").unwrap();
        assert!(matches!(load_sembias(&path), Err(Error::Parse { line: 1, .. })));
    }
}
