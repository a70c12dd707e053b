use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("subclass hierarchy contains a cycle through `{member}`")]
    SubclassCycle { member: String },

    #[error("relation `{0}` has no facts")]
    UndefinedRelation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid class expression: `{negated}` is not a subclass of `{base}`")]
    InvalidClassExpression { base: String, negated: String },

    #[error("no oracle decision for ({entity}, {relation})")]
    MissingDecision { entity: String, relation: String },

    #[error("conflicting gold labels for ({entity}, {relation})")]
    ConflictingLabel { entity: String, relation: String },

    #[error("relation `{0}` has category zero-or-more; its gold standard must come from external labels")]
    UnsupportedCategory(String),

    #[error("insufficient training labels for `{relation}`: {detail}")]
    InsufficientLabels { relation: String, detail: String },

    #[error("empty training set")]
    EmptyTraining,

    #[error("no grid point produced any rule for `{0}`")]
    EmptyModel(String),

    #[error("empty population for `{0}`")]
    EmptyPopulation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }
}
