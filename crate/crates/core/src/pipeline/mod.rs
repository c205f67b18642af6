//! The three experimental regimes and the evaluation battery.
//!
//! - **msnd**: meta-embedding of raw sources.
//! - **mssd**: one debiaser applied to the sources (`pre`), to the
//!   meta-embedding (`post`), or both (`both`).
//! - **ssmd**: several debiasers applied to one source, their outputs
//!   combined by a meta-embedding learner.

mod report;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use report::{fingerprint, EvalReport, Provenance, ReportFormat, ReportRow, TSV_HEADER};

use crate::debias::{DebiasConfig, DebiasContext, Debiaser, DictCorpus, GenderLexicon, DEFAULT_SIF_A};
use crate::embedding::{align, load_text, AlignPolicy, EmbeddingSet};
use crate::error::{Error, Result};
use crate::eval::{
    load_sembias, sembias, wat_propagate, wat_score, weat, SemBiasInstance, SimilarityDataset, WatGraph,
    DEFAULT_DAMPING, DEFAULT_EPS, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE,
};
use crate::meta::{MetaConfig, MetaLearner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "msnd")]
    Msnd,
    #[serde(rename = "mssd-pre")]
    MssdPre,
    #[serde(rename = "mssd-post")]
    MssdPost,
    #[serde(rename = "mssd-both")]
    MssdBoth,
    #[serde(rename = "ssmd")]
    Ssmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Pre,
    Post,
    Both,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Pre => "pre",
            Stage::Post => "post",
            Stage::Both => "both",
        }
    }
}

/// Evaluations, declared in the order they run and appear in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluation {
    Weat,
    Wat,
    Sembias,
    Similarity,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusRefs {
    /// `word<TAB>gloss` lines.
    pub glosses: PathBuf,
    /// JSON object of unigram probabilities.
    pub unigrams: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataRefs {
    pub sembias: Option<PathBuf>,
    /// Score only subset-marked SemBias instances. Defaults to doing so
    /// whenever any instance is marked.
    pub sembias_subset: Option<bool>,
    pub wat_edges: Option<PathBuf>,
    pub wat_seeds: Option<PathBuf>,
    /// Word-similarity datasets; the metric is named after the file stem.
    pub similarity: Vec<PathBuf>,
}

/// A pipeline run described as JSON. Relative paths are resolved against the
/// directory holding the spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSpec {
    pub sources: Vec<PathBuf>,
    pub regime: Regime,
    pub meta: MetaConfig,
    /// One entry for mssd, two or more for ssmd, none for msnd.
    pub debias: Vec<DebiasConfig>,
    pub lexicon: Option<PathBuf>,
    pub corpus: Option<CorpusRefs>,
    pub evaluations: Vec<Evaluation>,
    pub data: DataRefs,
    pub weat_permutations: usize,
    /// Words defining the SemBias gender direction.
    pub direction_pair: (String, String),
    pub align_policy: AlignPolicy,
    /// Also evaluate every raw source embedding.
    pub include_sources: bool,
    /// Seeds every learner, debiaser and permutation test in the run.
    pub seed: u64,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        Self {
            sources: Vec::new(),
            regime: Regime::Msnd,
            meta: MetaConfig::default(),
            debias: Vec::new(),
            lexicon: None,
            corpus: None,
            evaluations: Vec::new(),
            data: DataRefs::default(),
            weat_permutations: 10_000,
            direction_pair: ("he".into(), "she".into()),
            align_policy: AlignPolicy::UnionZero,
            include_sources: false,
            seed: 0,
        }
    }
}

impl PipelineSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            context: path.display().to_string(),
            source: e,
        })
    }

    pub fn validate(&self, n_sources: usize) -> Result<()> {
        match self.regime {
            Regime::Ssmd => {
                if n_sources != 1 {
                    return Err(Error::Config(format!("ssmd takes exactly 1 source, got {n_sources}")));
                }
                if self.debias.len() < 2 {
                    return Err(Error::Config("ssmd needs at least 2 debiasers".into()));
                }
            }
            Regime::Msnd | Regime::MssdPre | Regime::MssdPost | Regime::MssdBoth => {
                if n_sources < 2 {
                    return Err(Error::Config(format!(
                        "multi-source regimes need at least 2 sources, got {n_sources}"
                    )));
                }
                let want = usize::from(self.regime != Regime::Msnd);
                if self.debias.len() != want {
                    return Err(Error::Config(format!(
                        "{:?} takes {want} debiaser(s), got {}",
                        self.regime,
                        self.debias.len()
                    )));
                }
            }
        }
        for d in &self.debias {
            d.validate()?;
        }
        self.meta.validate()
    }

    /// Meta-learner configuration with the run seed applied.
    pub fn meta_config(&self) -> MetaConfig {
        self.meta.clone().with_seed(self.seed)
    }

    /// Debiaser configurations with the run seed applied.
    pub fn debias_configs(&self) -> Vec<DebiasConfig> {
        self.debias.iter().map(|d| d.clone().with_seed(self.seed)).collect()
    }

    /// Hash of the whole spec.
    pub fn hash(&self) -> String {
        fingerprint(serde_json::to_string(self).expect("spec serializes").as_bytes())
    }

    /// Hash of the settings that determine the produced embedding.
    pub fn config_fingerprint(&self) -> String {
        let key = serde_json::json!({
            "regime": self.regime,
            "meta": self.meta,
            "debias": self.debias,
            "align_policy": self.align_policy,
            "seed": self.seed,
        });
        fingerprint(key.to_string().as_bytes())
    }

    /// Reads every file the spec names.
    pub fn load_inputs(&self, base: &Path) -> Result<PipelineInputs> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let sources = self
            .sources
            .iter()
            .map(|p| load_text(resolve(p)))
            .collect::<Result<Vec<_>>>()?;
        let lexicon = match &self.lexicon {
            Some(p) => GenderLexicon::load(resolve(p))?,
            None => GenderLexicon::default(),
        };
        let corpus = match &self.corpus {
            Some(c) => {
                let a = self.debias.first().map_or(DEFAULT_SIF_A, |d| d.sif_a);
                Some(DictCorpus::load(resolve(&c.glosses), resolve(&c.unigrams), a)?)
            }
            None => None,
        };
        let sembias = self
            .data
            .sembias
            .as_deref()
            .map(|p| load_sembias(resolve(p)))
            .transpose()?;
        let wat = match (&self.data.wat_edges, &self.data.wat_seeds) {
            (Some(e), Some(s)) => Some(WatGraph::load(resolve(e), resolve(s))?),
            (None, None) => None,
            _ => return Err(Error::Config("wat needs both wat_edges and wat_seeds".into())),
        };
        let similarity = self
            .data
            .similarity
            .iter()
            .map(|p| {
                let name = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("similarity")
                    .to_string();
                Ok((name, SimilarityDataset::load(resolve(p))?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PipelineInputs {
            sources,
            lexicon,
            corpus,
            sembias,
            wat,
            similarity,
        })
    }
}

/// Everything a run reads, already parsed.
#[derive(Debug, Clone, Default)]
pub struct PipelineInputs {
    pub sources: Vec<EmbeddingSet>,
    pub lexicon: GenderLexicon,
    pub corpus: Option<DictCorpus>,
    pub sembias: Option<Vec<SemBiasInstance>>,
    pub wat: Option<WatGraph>,
    /// `(metric name, dataset)` pairs.
    pub similarity: Vec<(String, SimilarityDataset)>,
}

impl PipelineInputs {
    pub fn context(&self) -> DebiasContext<'_> {
        DebiasContext {
            lexicon: &self.lexicon,
            corpus: self.corpus.as_ref(),
        }
    }
}

/// Meta-embedding of raw sources.
pub fn msnd(sources: &[EmbeddingSet], meta: &dyn MetaLearner, policy: AlignPolicy) -> Result<EmbeddingSet> {
    let aligned = align(sources, policy).map_err(|e| e.in_stage("align"))?;
    meta.fit(&aligned)
        .map_err(|e| e.in_stage(format!("meta:{}", meta.label())))
}

fn debias_one(set: &EmbeddingSet, d: &dyn Debiaser, ctx: &DebiasContext<'_>) -> Result<EmbeddingSet> {
    d.debias(set, ctx)
        .map(|out| out.set)
        .map_err(|e| e.in_stage(format!("debias:{}:{}", d.label(), set.name())))
}

/// One debiaser applied before (`pre`), after (`post`) or both before and
/// after the meta-embedding step. The `post` debiaser is refit in the
/// meta-embedding space.
pub fn mssd(
    sources: &[EmbeddingSet],
    meta: &dyn MetaLearner,
    debiaser: &dyn Debiaser,
    ctx: &DebiasContext<'_>,
    stage: Stage,
    policy: AlignPolicy,
) -> Result<EmbeddingSet> {
    let inputs = match stage {
        Stage::Pre | Stage::Both => sources
            .iter()
            .map(|s| debias_one(s, debiaser, ctx))
            .collect::<Result<Vec<_>>>()?,
        Stage::Post => sources.to_vec(),
    };
    let m = msnd(&inputs, meta, policy)?;
    match stage {
        Stage::Pre => Ok(m),
        Stage::Post | Stage::Both => debias_one(&m, debiaser, ctx),
    }
}

/// Several debiasers on one source, combined by a meta-embedding learner.
pub fn ssmd(
    source: &EmbeddingSet,
    meta: &dyn MetaLearner,
    debiasers: &[&dyn Debiaser],
    ctx: &DebiasContext<'_>,
    policy: AlignPolicy,
) -> Result<EmbeddingSet> {
    if debiasers.is_empty() {
        return Err(Error::Config("ssmd needs at least one debiaser".into()));
    }
    let outputs = debiasers
        .iter()
        .map(|d| debias_one(source, *d, ctx))
        .collect::<Result<Vec<_>>>()?;
    msnd(&outputs, meta, policy)
}

pub struct RunOutput {
    pub embedding: EmbeddingSet,
    pub label: String,
    pub report: EvalReport,
}

fn run_label(spec: &PipelineSpec) -> String {
    let meta = spec.meta.method.as_str();
    let debias: Vec<&str> = spec.debias.iter().map(|d| d.method.as_str()).collect();
    let debias = if debias.is_empty() {
        "none".to_string()
    } else {
        debias.join("+")
    };
    let stage = match spec.regime {
        Regime::Msnd => "msnd",
        Regime::MssdPre => "pre",
        Regime::MssdPost => "post",
        Regime::MssdBoth => "both",
        Regime::Ssmd => "ssmd",
    };
    format!("{meta}:{debias}:{stage}")
}

fn new_report(spec: &PipelineSpec) -> EvalReport {
    EvalReport::new(Provenance {
        spec_hash: spec.hash(),
        seed: spec.seed,
    })
}

/// Runs `spec` on already-loaded inputs.
pub fn run(spec: &PipelineSpec, inputs: &PipelineInputs) -> Result<RunOutput> {
    match spec.regime {
        Regime::Msnd => run_msnd(spec, inputs),
        Regime::MssdPre => run_mssd(spec, inputs, Stage::Pre),
        Regime::MssdPost => run_mssd(spec, inputs, Stage::Post),
        Regime::MssdBoth => run_mssd(spec, inputs, Stage::Both),
        Regime::Ssmd => run_ssmd(spec, inputs),
    }
}

fn finish(spec: &PipelineSpec, inputs: &PipelineInputs, embedding: EmbeddingSet) -> Result<RunOutput> {
    let label = run_label(spec);
    let fp = spec.config_fingerprint();
    let mut report = new_report(spec);
    if spec.include_sources {
        for s in &inputs.sources {
            report.extend(evaluate(s, &format!("source:none:{}", s.name()), spec, inputs, &fp)?);
        }
    }
    report.extend(evaluate(&embedding, &label, spec, inputs, &fp)?);
    Ok(RunOutput {
        embedding,
        label,
        report,
    })
}

fn check_regime(spec: &PipelineSpec, inputs: &PipelineInputs, allowed: &[Regime]) -> Result<()> {
    if !allowed.contains(&spec.regime) {
        return Err(Error::Config(format!(
            "regime {:?} does not match this entry point",
            spec.regime
        )));
    }
    spec.validate(inputs.sources.len())
}

pub fn run_msnd(spec: &PipelineSpec, inputs: &PipelineInputs) -> Result<RunOutput> {
    check_regime(spec, inputs, &[Regime::Msnd])?;
    let m = msnd(&inputs.sources, &spec.meta_config(), spec.align_policy)?;
    finish(spec, inputs, m)
}

pub fn run_mssd(spec: &PipelineSpec, inputs: &PipelineInputs, stage: Stage) -> Result<RunOutput> {
    let want = match stage {
        Stage::Pre => Regime::MssdPre,
        Stage::Post => Regime::MssdPost,
        Stage::Both => Regime::MssdBoth,
    };
    check_regime(spec, inputs, &[want])?;
    let debias = &spec.debias_configs()[0];
    let m = mssd(
        &inputs.sources,
        &spec.meta_config(),
        debias,
        &inputs.context(),
        stage,
        spec.align_policy,
    )?;
    finish(spec, inputs, m)
}

pub fn run_ssmd(spec: &PipelineSpec, inputs: &PipelineInputs) -> Result<RunOutput> {
    check_regime(spec, inputs, &[Regime::Ssmd])?;
    let configs = spec.debias_configs();
    let debiasers: Vec<&dyn Debiaser> = configs.iter().map(|d| d as &dyn Debiaser).collect();
    let m = ssmd(
        &inputs.sources[0],
        &spec.meta_config(),
        &debiasers,
        &inputs.context(),
        spec.align_policy,
    )?;
    finish(spec, inputs, m)
}

fn missing_input(what: &str) -> Error {
    Error::Config(format!("evaluation `{what}` requested but its data is not configured"))
}

/// Runs the configured evaluations on one embedding, in the fixed order
/// weat, wat, sembias, similarity.
pub fn evaluate(
    set: &EmbeddingSet,
    label: &str,
    spec: &PipelineSpec,
    inputs: &PipelineInputs,
    fp: &str,
) -> Result<EvalReport> {
    let mut report = new_report(spec);
    let mut evals = spec.evaluations.clone();
    evals.sort();
    evals.dedup();
    for e in evals {
        match e {
            Evaluation::Weat => {
                let queries = &inputs.lexicon.weat_queries;
                if queries.is_empty() {
                    return Err(missing_input("weat"));
                }
                let mut effects = Vec::new();
                let mut skipped = 0;
                for q in queries {
                    match weat(set, q, spec.weat_permutations, spec.seed) {
                        Ok(r) => effects.push(r.effect_size.abs()),
                        Err(Error::MissingWords(_)) => skipped += 1,
                        Err(err) => return Err(err.in_stage(format!("eval:weat:{}", q.name))),
                    }
                }
                if effects.is_empty() {
                    return Err(Error::Config("no WEAT query could be scored".into()).in_stage("eval:weat"));
                }
                let mean = effects.iter().sum::<f64>() / effects.len() as f64;
                report.push(label, "weat", mean, skipped, fp);
            }
            Evaluation::Wat => {
                let g = inputs.wat.as_ref().ok_or_else(|| missing_input("wat"))?;
                let props = wat_propagate(g, DEFAULT_DAMPING, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS)
                    .map_err(|e| e.in_stage("eval:wat"))?;
                let r = wat_score(set, g, &props, DEFAULT_EPS).map_err(|e| e.in_stage("eval:wat"))?;
                report.push(label, "wat", r.correlation, r.n_skipped, fp);
            }
            Evaluation::Sembias => {
                let all = inputs.sembias.as_ref().ok_or_else(|| missing_input("sembias"))?;
                let subset = spec
                    .data
                    .sembias_subset
                    .unwrap_or_else(|| all.iter().any(|i| i.in_subset));
                let chosen: Vec<SemBiasInstance> = if subset {
                    all.iter().filter(|i| i.in_subset).cloned().collect()
                } else {
                    all.clone()
                };
                let (he, she) = &spec.direction_pair;
                let r = sembias(set, &chosen, (he, she)).map_err(|e| e.in_stage("eval:sembias"))?;
                report.push(label, "sembias", r.stereotype_pct + r.none_pct, r.n_skipped, fp);
            }
            Evaluation::Similarity => {
                if inputs.similarity.is_empty() {
                    return Err(missing_input("similarity"));
                }
                for (name, data) in &inputs.similarity {
                    let r = crate::eval::similarity_benchmark(set, data)
                        .map_err(|e| e.in_stage(format!("eval:similarity:{name}")))?;
                    report.push(label, name, r.reported(), r.n_skipped, fp);
                }
            }
        }
    }
    Ok(report)
}
