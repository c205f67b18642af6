//! `metafair`: meta-embedding, debiasing and bias evaluation from the shell.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.
//! Diagnostics go to standard error; results go to standard output or to
//! the path given by `--out`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use metafair::debias::{DebiasConfig, DebiasContext, DebiasMethod, Debiaser, DictCorpus, GenderLexicon, Rejection};
use metafair::embedding::{align, load_text, save_text, AlignPolicy};
use metafair::eval::{
    load_sembias, load_weat_queries, sembias, similarity_benchmark, wat_propagate, wat_score, weat, SimilarityDataset,
    WatGraph, DEFAULT_DAMPING, DEFAULT_EPS, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE,
};
use metafair::meta::{fit, MetaConfig, MetaMethod};
use metafair::pipeline::{self, EvalReport, PipelineSpec, Provenance, ReportFormat};
use metafair::plot::scatter_svg;
use metafair::{Error, Result};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("METAFAIR_BUILD"), ")");

#[derive(Parser)]
#[command(name = "metafair", version = VERSION, about = "Meta-embedding, debiasing and gender-bias evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Union,
    Intersection,
}

impl From<Policy> for AlignPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Union => AlignPolicy::UnionZero,
            Policy::Intersection => AlignPolicy::Intersection,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BiasMetric {
    Weat,
    Wat,
    Sembias,
}

#[derive(Subcommand)]
enum Command {
    /// Re-encode an embedding file (gzip by `.gz` extension), optionally
    /// keeping only the words listed one per line in `--vocab`.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Learn a meta-embedding from several sources.
    Meta {
        #[arg(long)]
        method: MetaMethod,
        #[arg(long, num_args = 1.., required = true)]
        sources: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        neighbors: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long, value_enum, default_value = "union")]
        policy: Policy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Debias one embedding.
    Debias {
        #[arg(long)]
        method: DebiasMethod,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Bias-subspace rank (hard).
        #[arg(long)]
        k: Option<usize>,
        /// Projection iterations (inlp).
        #[arg(long)]
        m: Option<usize>,
        /// `word<TAB>gloss` file (dict).
        #[arg(long)]
        glosses: Option<PathBuf>,
        /// Unigram probability JSON (dict).
        #[arg(long)]
        unigrams: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Use `v − ⟨v, g⟩v` in place of the orthogonal rejection (dict).
        #[arg(long)]
        printed_rejection: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score gender bias with WEAT, WAT or SemBias.
    EvalBias {
        #[arg(long, value_enum)]
        metric: BiasMetric,
        #[arg(long = "in")]
        input: PathBuf,
        /// WEAT queries / lexicon JSON, WAT edge list, or SemBias TSV.
        #[arg(long)]
        data: PathBuf,
        /// WAT seed pairs JSON.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        permutations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Score only subset-marked SemBias instances.
        #[arg(long)]
        subset: bool,
        #[arg(long, num_args = 2, default_values = ["he", "she"])]
        direction: Vec<String>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score word-similarity benchmarks.
    EvalSim {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        data: Vec<PathBuf>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a pipeline spec and write its report (`.json` for JSON, TSV otherwise).
    Pipeline {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also save the produced embedding.
        #[arg(long)]
        embedding_out: Option<PathBuf>,
    },
    /// Scatter plot of one report metric against another, as SVG.
    Plot {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        x_metric: String,
        /// Defaults to the `--x` report.
        #[arg(long)]
        y: Option<PathBuf>,
        #[arg(long)]
        y_metric: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::InvalidArgument(_) => 2,
        Error::Numeric(_)
        | Error::NonConvergence { .. }
        | Error::DegenerateSubspace(_)
        | Error::DegenerateVector(_)
        | Error::DegenerateEffect
        | Error::DegenerateLabels
        | Error::UndefinedCorrelation => 4,
        _ => 3,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            })
        }
    }
}

fn emit_report(report: &EvalReport, out: Option<&Path>) -> Result<()> {
    let text = match out.map(ReportFormat::from_path) {
        Some(ReportFormat::Json) => report.to_json(),
        _ => report.to_tsv(),
    };
    emit(&text, out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert { input, out, vocab } => {
            let mut set = load_text(&input)?;
            if let Some(v) = vocab {
                let text = fs::read_to_string(&v).map_err(|e| Error::Io {
                    path: v.clone(),
                    source: e,
                })?;
                let words: Vec<&str> = text.lines().map(str::trim).filter(|w| !w.is_empty()).collect();
                let (known, missing) = set.partition_known(&words);
                if !missing.is_empty() {
                    eprintln!("{} listed words not in {}", missing.len(), input.display());
                }
                set = set.restrict(&known)?;
            }
            save_text(&set, &out)
        }
        Command::Meta {
            method,
            sources,
            out,
            dim,
            neighbors,
            epochs,
            learning_rate,
            policy,
            seed,
        } => {
            let sets = sources.iter().map(load_text).collect::<Result<Vec<_>>>()?;
            let mut cfg = MetaConfig::new(method).with_seed(seed);
            cfg.meta_dim = dim;
            if let Some(k) = neighbors {
                cfg.neighbors = k;
            }
            if let Some(e) = epochs {
                cfg.optimizer.epochs = e;
            }
            if let Some(lr) = learning_rate {
                cfg.optimizer.learning_rate = lr;
            }
            let aligned = align(&sets, policy.into())?;
            save_text(&fit(&aligned, &cfg)?, &out)
        }
        Command::Debias {
            method,
            input,
            lexicon,
            out,
            k,
            m,
            glosses,
            unigrams,
            epochs,
            alpha,
            beta,
            gamma,
            printed_rejection,
            seed,
        } => {
            let set = load_text(&input)?;
            let lex = GenderLexicon::load(&lexicon)?;
            let mut cfg = DebiasConfig {
                method,
                ..Default::default()
            }
            .with_seed(seed);
            cfg.k = k.unwrap_or(cfg.k);
            cfg.m = m.unwrap_or(cfg.m);
            cfg.alpha = alpha.unwrap_or(cfg.alpha);
            cfg.beta = beta.unwrap_or(cfg.beta);
            cfg.gamma = gamma.unwrap_or(cfg.gamma);
            if let Some(e) = epochs {
                cfg.optimizer.epochs = e;
            }
            if printed_rejection {
                cfg.rejection = Rejection::Printed;
            }
            let corpus = match (glosses, unigrams) {
                (Some(g), Some(u)) => Some(DictCorpus::load(g, u, cfg.sif_a)?),
                (None, None) => None,
                _ => return Err(Error::InvalidArgument("--glosses and --unigrams go together".into())),
            };
            let ctx = DebiasContext {
                lexicon: &lex,
                corpus: corpus.as_ref(),
            };
            let result = cfg.debias(&set, &ctx)?;
            if !result.degenerate.is_empty() {
                eprintln!("{} words left unchanged (degenerate)", result.degenerate.len());
            }
            if !result.missing.is_empty() {
                eprintln!("{} lexicon words not in the vocabulary", result.missing.len());
            }
            save_text(&result.set, &out)
        }
        Command::EvalBias {
            metric,
            input,
            data,
            seeds,
            permutations,
            seed,
            subset,
            direction,
            label,
            out,
        } => {
            let set = load_text(&input)?;
            let label = label.unwrap_or_else(|| set.name().to_string());
            let mut report = EvalReport::new(Provenance {
                spec_hash: String::new(),
                seed,
            });
            let fp = pipeline::fingerprint(format!("{label}:{seed}:{permutations}").as_bytes());
            match metric {
                BiasMetric::Weat => {
                    let queries = load_weat_queries(&data)?;
                    if queries.is_empty() {
                        return Err(Error::Config(format!("{} holds no WEAT queries", data.display())));
                    }
                    let mut total = 0.0;
                    for q in &queries {
                        let r = weat(&set, q, permutations, seed)?;
                        report.push(&label, &format!("weat:{}", q.name), r.effect_size, 0, &fp);
                        report.push(&label, &format!("weat_p:{}", q.name), r.p_value, 0, &fp);
                        total += r.effect_size.abs();
                    }
                    report.push(&label, "weat", total / queries.len() as f64, 0, &fp);
                }
                BiasMetric::Wat => {
                    let seeds = seeds.ok_or_else(|| Error::InvalidArgument("wat needs --seeds".into()))?;
                    let g = WatGraph::load(&data, &seeds)?;
                    let props = wat_propagate(&g, DEFAULT_DAMPING, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS)?;
                    let r = wat_score(&set, &g, &props, DEFAULT_EPS)?;
                    report.push(&label, "wat", r.correlation, r.n_skipped, &fp);
                }
                BiasMetric::Sembias => {
                    let mut instances = load_sembias(&data)?;
                    if subset {
                        instances.retain(|i| i.in_subset);
                    }
                    let r = sembias(&set, &instances, (&direction[0], &direction[1]))?;
                    report.push(&label, "sembias", r.stereotype_pct + r.none_pct, r.n_skipped, &fp);
                    report.push(&label, "sembias_definition", r.definition_pct, r.n_skipped, &fp);
                    report.push(&label, "sembias_stereotype", r.stereotype_pct, r.n_skipped, &fp);
                    report.push(&label, "sembias_none", r.none_pct, r.n_skipped, &fp);
                }
            }
            emit_report(&report, out.as_deref())
        }
        Command::EvalSim {
            input,
            data,
            label,
            out,
        } => {
            let set = load_text(&input)?;
            let label = label.unwrap_or_else(|| set.name().to_string());
            let fp = pipeline::fingerprint(label.as_bytes());
            let mut report = EvalReport::default();
            for path in &data {
                let ds = SimilarityDataset::load(path)?;
                let r = similarity_benchmark(&set, &ds)?;
                let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("similarity");
                report.push(&label, name, r.reported(), r.n_skipped, &fp);
            }
            emit_report(&report, out.as_deref())
        }
        Command::Pipeline {
            spec,
            out,
            seed,
            embedding_out,
        } => {
            let mut parsed = PipelineSpec::load(&spec)?;
            if let Some(s) = seed {
                parsed.seed = s;
            }
            let base = spec.parent().map(Path::to_path_buf).unwrap_or_default();
            let inputs = parsed.load_inputs(&base)?;
            let result = pipeline::run(&parsed, &inputs)?;
            if let Some(p) = embedding_out {
                save_text(&result.embedding, p)?;
            }
            emit_report(&result.report, out.as_deref())
        }
        Command::Plot {
            x,
            x_metric,
            y,
            y_metric,
            out,
        } => {
            let rx = EvalReport::load(&x)?;
            let ry = match &y {
                Some(p) => EvalReport::load(p)?,
                None => rx.clone(),
            };
            emit(&scatter_svg(&rx, &x_metric, &ry, &y_metric)?, Some(&out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
