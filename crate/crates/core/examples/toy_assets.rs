//! Regenerates the bundled toy assets under `assets/toy/`.
//!
//! ```text
//! cargo run -p metafair --example toy_assets -- assets/toy
//! ```
//!
//! Words get a latent vector from a topic centroid plus word noise, plus a
//! component along a hidden gender direction: large for definitional words,
//! moderate for names and occupational stereotypes, small for career/family
//! style attributes. Four sources of different dimension are random
//! projections of those latents with source-specific bias strength and
//! noise, each missing a few filler words.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use metafair::debias::GenderLexicon;
use metafair::embedding::save_text;
use metafair::eval::WeatQuery;
use metafair::EmbeddingSet;

const LATENT: usize = 32;

const PAIRS: &[(&str, &str)] = &[
    ("he", "she"),
    ("him", "her"),
    ("his", "hers"),
    ("man", "woman"),
    ("men", "women"),
    ("boy", "girl"),
    ("boys", "girls"),
    ("father", "mother"),
    ("son", "daughter"),
    ("brother", "sister"),
    ("king", "queen"),
    ("husband", "wife"),
    ("uncle", "aunt"),
    ("mr", "mrs"),
    ("male", "female"),
    ("gentleman", "lady"),
    ("nephew", "niece"),
    ("grandfather", "grandmother"),
];

const MALE_JOBS: &[&str] = &[
    "engineer",
    "programmer",
    "surgeon",
    "captain",
    "pilot",
    "carpenter",
    "mechanic",
    "boss",
    "scientist",
    "architect",
];
const FEMALE_JOBS: &[&str] = &[
    "nurse",
    "receptionist",
    "secretary",
    "librarian",
    "homemaker",
    "dancer",
    "hairdresser",
    "nanny",
    "stylist",
    "housekeeper",
];
const MALE_NAMES: &[&str] = &["john", "paul", "mike", "kevin"];
const FEMALE_NAMES: &[&str] = &["amy", "joan", "lisa", "sarah"];
const CAREER: &[&str] = &["executive", "management", "professional", "salary"];
const FAMILY: &[&str] = &["home", "parents", "children", "relatives"];
const MATH: &[&str] = &["math", "algebra", "geometry", "calculus"];
const ARTS: &[&str] = &["poetry", "art", "literature", "symphony"];
const SCIENCE: &[&str] = &["physics", "chemistry", "experiment", "astronomy"];
const ARTS2: &[&str] = &["novel", "drama", "sculpture", "painting"];
const FILLER: &[&str] = &[
    "table", "chair", "river", "mountain", "computer", "car", "tree", "book", "water", "city", "bread", "road",
    "window", "garden", "train", "cloud", "stone", "paper", "lamp", "bridge", "forest", "ocean", "street", "music",
];

/// Topic of each word group; words in one topic share a centroid.
fn vocabulary() -> Vec<(String, usize, f64)> {
    let mut out = Vec::new();
    let mut add = |words: &[&str], topic: usize, gender: f64| {
        for w in words {
            out.push((w.to_string(), topic, gender));
        }
    };
    for (i, (m, f)) in PAIRS.iter().enumerate() {
        let topic = i % 3;
        add(&[m], topic, 0.6);
        add(&[f], topic, -0.6);
    }
    add(MALE_JOBS, 3, 0.35);
    add(FEMALE_JOBS, 3, -0.35);
    add(MALE_NAMES, 4, 0.3);
    add(FEMALE_NAMES, 4, -0.3);
    add(CAREER, 5, 0.15);
    add(FAMILY, 6, -0.15);
    add(MATH, 7, 0.15);
    add(ARTS, 8, -0.15);
    add(SCIENCE, 7, 0.15);
    add(ARTS2, 8, -0.15);
    add(FILLER, 9, 0.0);
    out
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array1<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit(v: Array1<f64>) -> Array1<f64> {
    let n = v.dot(&v).sqrt();
    v / n
}

fn strings(ws: &[&str]) -> Vec<String> {
    ws.iter().map(|w| w.to_string()).collect()
}

fn write(dir: &Path, name: &str, text: String) {
    fs::write(dir.join(name), text).expect("write asset");
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "assets/toy".into()));
    fs::create_dir_all(&dir).expect("create output directory");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let vocab = vocabulary();
    let g = unit(gaussian(&mut rng, LATENT, 1.0));
    let centroids: Vec<Array1<f64>> = (0..10).map(|_| unit(gaussian(&mut rng, LATENT, 1.0))).collect();
    // Semantic part without gender, shared by all sources.
    let semantic: Vec<Array1<f64>> = vocab
        .iter()
        .map(|(_, topic, _)| {
            let mut v = &centroids[*topic] * 0.8 + gaussian(&mut rng, LATENT, 0.6 / (LATENT as f64).sqrt());
            let along = v.dot(&g);
            v.scaled_add(-along, &g);
            v
        })
        .collect();

    let sources = [
        ("src_a", 24usize, 1.0f64),
        ("src_b", 20, 1.3),
        ("src_c", 16, 0.8),
        ("src_d", 28, 1.1),
    ];
    for (j, (name, dim, strength)) in sources.iter().enumerate() {
        let proj = Array2::from_shape_simple_fn((LATENT, *dim), || {
            rng.sample::<f64, _>(StandardNormal) / (*dim as f64).sqrt()
        });
        let mut rows = Vec::new();
        for (i, (word, _, gender)) in vocab.iter().enumerate() {
            // Each source misses two filler words.
            if let Some(k) = FILLER.iter().position(|f| f == word) {
                if k / 2 == j {
                    continue;
                }
            }
            let is_definitional = PAIRS.iter().any(|(m, f)| m == word || f == word);
            let scale = if is_definitional { 1.0 } else { *strength };
            let mut latent = semantic[i].clone();
            latent.scaled_add(gender * scale, &g);
            let v = latent.dot(&proj) + gaussian(&mut rng, *dim, 0.02);
            rows.push((word.clone(), v.to_vec()));
        }
        let set = EmbeddingSet::from_rows(*name, rows).expect("valid toy embedding");
        save_text(&set, dir.join(format!("{name}.txt"))).expect("save embedding");
    }

    // Lexicon with three 4+4 WEAT queries.
    let lexicon = GenderLexicon {
        defining_pairs: PAIRS.iter().map(|(m, f)| (m.to_string(), f.to_string())).collect(),
        seed_pairs: PAIRS[..6].iter().map(|(m, f)| (m.to_string(), f.to_string())).collect(),
        weat_queries: vec![
            WeatQuery {
                name: "T6".into(),
                x: strings(MALE_NAMES),
                y: strings(FEMALE_NAMES),
                a: strings(CAREER),
                b: strings(FAMILY),
            },
            WeatQuery {
                name: "T7".into(),
                x: strings(MATH),
                y: strings(ARTS),
                a: strings(&["male", "man", "boy", "brother", "he", "him", "his", "son"]),
                b: strings(&["female", "woman", "girl", "sister", "she", "her", "hers", "daughter"]),
            },
            WeatQuery {
                name: "T8".into(),
                x: strings(SCIENCE),
                y: strings(ARTS2),
                a: strings(&["brother", "father", "uncle", "grandfather", "son", "he", "his", "him"]),
                b: strings(&[
                    "sister",
                    "mother",
                    "aunt",
                    "grandmother",
                    "daughter",
                    "she",
                    "hers",
                    "her",
                ]),
            },
        ],
        neutral_words: None,
    };
    lexicon.save(dir.join("lexicon.json")).expect("save lexicon");

    // Word-similarity sets rated from the gender-free semantic vectors.
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, v)| (v.0.as_str(), i)).collect();
    let content: Vec<&str> = vocab
        .iter()
        .map(|v| v.0.as_str())
        .filter(|w| !PAIRS.iter().any(|(m, f)| m == w || f == w))
        .collect();
    for (name, n_pairs, noise) in [("sl", 80, 0.6), ("men", 120, 0.3)] {
        let mut lines = String::new();
        for _ in 0..n_pairs {
            let a = content[rng.random_range(0..content.len())];
            let mut b = content[rng.random_range(0..content.len())];
            while b == a {
                b = content[rng.random_range(0..content.len())];
            }
            let (va, vb) = (&semantic[index[a]], &semantic[index[b]]);
            let cos = va.dot(vb) / (va.dot(va).sqrt() * vb.dot(vb).sqrt());
            let rating = (5.0 + 5.0 * cos + noise * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 10.0);
            lines.push_str(&format!("{a}\t{b}\t{:.2}\n", rating));
        }
        write(&dir, &format!("{name}.tsv"), lines);
    }

    // SemBias: definition pairs × stereotype pairs, two filler pairs each.
    // Instances built on the first two pairs form the marked subset.
    let mut sembias = String::new();
    let stereo: Vec<(&str, &str)> = MALE_JOBS.iter().copied().zip(FEMALE_JOBS.iter().copied()).collect();
    for (d, (m, f)) in PAIRS[..6].iter().enumerate() {
        for (sm, sf) in &stereo {
            let mut filler = FILLER.to_vec();
            filler.shuffle(&mut rng);
            let marker = if d < 2 { "\t1" } else { "" };
            sembias.push_str(&format!(
                "{m}\t{f}\t{sm}\t{sf}\t{}\t{}\t{}\t{}{marker}\n",
                filler[0], filler[1], filler[2], filler[3]
            ));
        }
    }
    write(&dir, "sembias.tsv", sembias);

    // Association graph: topic neighbours, plus gendered words linked to the
    // stereotypes and attributes that lean their way.
    let mut edges: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut link = |a: &str, b: &str, w: f64| {
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        *edges.entry(key).or_default() += w;
    };
    for (i, (a, ta, ga)) in vocab.iter().enumerate() {
        for (b, tb, gb) in &vocab[i + 1..] {
            if ta == tb && rng.random_bool(0.3) {
                link(a, b, 1.0);
            }
            if ga * gb > 0.0 && (ga.abs() >= 0.6 || gb.abs() >= 0.6) && rng.random_bool(0.15) {
                link(a, b, 2.0 * ga.abs().min(gb.abs()));
            }
        }
    }
    let mut graph = String::new();
    for ((a, b), w) in &edges {
        graph.push_str(&format!("{a}\t{b}\t{w:.3}\n"));
    }
    write(&dir, "wat_edges.tsv", graph);
    let seeds: Vec<[&str; 2]> = PAIRS[..8].iter().map(|(m, f)| [*m, *f]).collect();
    write(
        &dir,
        "wat_seeds.json",
        serde_json::to_string_pretty(&seeds).unwrap() + "\n",
    );

    // Glosses: topic words plus gender words only for definitional entries.
    let topic_words: Vec<Vec<&str>> = (0..10)
        .map(|t| vocab.iter().filter(|v| v.1 == t).map(|v| v.0.as_str()).collect())
        .collect();
    let mut glosses = String::new();
    for (word, topic, gender) in &vocab {
        let mut tokens: Vec<&str> = vec!["a"];
        if PAIRS.iter().any(|(m, f)| m == word || f == word) {
            tokens.push(if *gender > 0.0 { "male" } else { "female" });
        }
        let pool = &topic_words[*topic];
        for _ in 0..4 {
            let t = pool[rng.random_range(0..pool.len())];
            if t != word {
                tokens.push(t);
            }
        }
        tokens.push("of");
        tokens.push("the");
        tokens.push(FILLER[rng.random_range(0..FILLER.len())]);
        glosses.push_str(&format!("{word}\t{}.\n", tokens.join(" ")));
    }
    write(&dir, "glosses.tsv", glosses);
    let mut unigrams = BTreeMap::new();
    for (rank, (w, _, _)) in vocab.iter().enumerate() {
        unigrams.insert(w.clone(), 0.05 / (rank as f64 + 10.0));
    }
    unigrams.insert("a".into(), 0.04);
    unigrams.insert("of".into(), 0.03);
    unigrams.insert("the".into(), 0.05);
    write(
        &dir,
        "unigrams.json",
        serde_json::to_string_pretty(&unigrams).unwrap() + "\n",
    );

    // Adversarial pair for the averaging preservation check: each source's
    // neutral words lie along the other source's gender direction.
    let adversarial = |name: &str, axis: usize, other: usize| {
        let e = |i: usize, s: f64| {
            let mut v = vec![0.0; 3];
            v[i] = s;
            v
        };
        let mut rows = vec![("he".to_string(), e(axis, 1.0)), ("she".to_string(), e(axis, -1.0))];
        rows.push((
            "nurse".into(),
            vec![
                if other == 0 { 0.8 } else { 0.0 },
                if other == 1 { 0.8 } else { 0.0 },
                0.6,
            ],
        ));
        rows.push(("table".into(), {
            let mut v = e(other, 0.6);
            v[2] = 0.8;
            v
        }));
        EmbeddingSet::from_rows(name, rows).expect("adversarial rows")
    };
    save_text(&adversarial("adv_a", 0, 1), dir.join("adv_a.txt")).unwrap();
    save_text(&adversarial("adv_b", 1, 0), dir.join("adv_b.txt")).unwrap();
    let adv_lex = GenderLexicon {
        defining_pairs: vec![("he".into(), "she".into())],
        ..Default::default()
    };
    adv_lex.save(dir.join("adv_lexicon.json")).unwrap();

    // Pipeline specs, one per regime.
    let evaluations = json!(["weat", "wat", "sembias", "similarity"]);
    let data = json!({
        "sembias": "sembias.tsv",
        "wat_edges": "wat_edges.tsv",
        "wat_seeds": "wat_seeds.json",
        "similarity": ["sl.tsv", "men.tsv"],
    });
    let corpus = json!({"glosses": "glosses.tsv", "unigrams": "unigrams.json"});
    let specs = [
        (
            "pipeline_msnd.json",
            json!({
                "sources": ["src_a.txt", "src_b.txt", "src_c.txt", "src_d.txt"],
                "regime": "msnd",
                "meta": {"method": "avg"},
            }),
        ),
        (
            "pipeline_mssd_pre.json",
            json!({
                "sources": ["src_a.txt", "src_b.txt"],
                "regime": "mssd-pre",
                "meta": {"method": "conc"},
                "debias": [{"method": "hard"}],
            }),
        ),
        (
            "pipeline_mssd_post.json",
            json!({
                "sources": ["src_a.txt", "src_b.txt"],
                "regime": "mssd-post",
                "meta": {"method": "gle", "meta_dim": 12, "optimizer": {"epochs": 50}},
                "debias": [{"method": "inlp", "m": 4}],
            }),
        ),
        (
            "pipeline_mssd_both.json",
            json!({
                "sources": ["src_a.txt", "src_b.txt"],
                "regime": "mssd-both",
                "meta": {"method": "aeme", "meta_dim": 12, "optimizer": {"epochs": 60}},
                "debias": [{"method": "dict", "optimizer": {"epochs": 40}}],
            }),
        ),
        (
            "pipeline_ssmd.json",
            json!({
                "sources": ["src_a.txt"],
                "regime": "ssmd",
                "meta": {"method": "lle", "meta_dim": 10, "neighbors": 5, "optimizer": {"epochs": 50}},
                "debias": [{"method": "hard"}, {"method": "inlp", "m": 4}],
            }),
        ),
    ];
    for (file, mut spec) in specs {
        let obj = spec.as_object_mut().unwrap();
        obj.insert("lexicon".into(), json!("lexicon.json"));
        obj.insert("corpus".into(), corpus.clone());
        obj.insert("evaluations".into(), evaluations.clone());
        obj.insert("data".into(), data.clone());
        obj.insert("weat_permutations".into(), json!(1000));
        obj.insert("include_sources".into(), json!(true));
        obj.insert("seed".into(), json!(7));
        write(&dir, file, serde_json::to_string_pretty(&spec).unwrap() + "\n");
    }
    println!("wrote toy assets to {}", dir.display());
}
