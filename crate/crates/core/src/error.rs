use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// A file did not match its declared format. `line` is 1-based.
    #[error("malformed input at line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("lexicon is empty")]
    EmptyLexicon,

    #[error("vocabulary target {target} is smaller than the alphabet ({alphabet} symbols)")]
    TargetBelowAlphabet { target: usize, alphabet: usize },

    #[error("word {0:?} contains whitespace or control characters")]
    InvalidWord(String),

    #[error("duplicate language code {0:?}")]
    DuplicateLanguage(String),

    #[error("at least {needed} inputs are required, got {got}")]
    TooFewInputs { needed: usize, got: usize },

    #[error("{0} is empty")]
    EmptyInput(&'static str),

    #[error("input encodes to zero tokens")]
    NoTokens,

    #[error("language {0:?} has no classification")]
    Unclassified(String),

    #[error("distance matrices have different labels")]
    LabelMismatch,

    #[error("distance matrix is not valid: {0}")]
    InvalidMatrix(String),

    #[error("correlation is undefined: upper triangle has zero variance")]
    ZeroVariance,

    #[error("no within-group pairs")]
    NoWithinPairs,

    #[error("no between-group pairs")]
    NoBetweenPairs,

    #[error("malformed gold segmentation for {word:?}: {message}")]
    MalformedGold { word: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn malformed(line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            line,
            message: message.into(),
        }
    }
}
