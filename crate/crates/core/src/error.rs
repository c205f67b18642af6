use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("duplicate token `{0}`")]
    DuplicateToken(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("`{0}` is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("training labels contain a single class")]
    DegenerateLabels,

    #[error("correlation is undefined for constant input")]
    UndefinedCorrelation,

    #[error("training vocabulary (intersection of sources) is empty")]
    EmptyTrainingSet,

    #[error("no defining pair could be resolved against the vocabulary")]
    EmptyDefiningSets,

    #[error("bias subspace is degenerate: {0}")]
    DegenerateSubspace(String),

    #[error("vector of `{0}` has no component outside the bias subspace")]
    DegenerateVector(String),

    #[error("gloss of `{0}` has no resolvable tokens")]
    EmptyGloss(String),

    #[error("association scores have zero standard deviation")]
    DegenerateEffect,

    #[error("words missing from the vocabulary: {}", .0.join(", "))]
    MissingWords(Vec<String>),

    #[error("propagation did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("need at least 2 overlapping words, found {0}")]
    InsufficientOverlap(usize),

    #[error("no SemBias instance could be scored")]
    NoScorableInstances,

    #[error("need at least 2 scoreable entries, found {0}")]
    InsufficientData(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no labels shared between the two reports")]
    EmptyPlot,

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Wraps the error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
