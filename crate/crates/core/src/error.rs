use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("line {line}: unparseable date {value:?}")]
    BadDate { line: usize, value: String },

    #[error("duplicate document id {0:?} with differing content")]
    DuplicateId(String),

    #[error("corpus file contains no records")]
    EmptyFile,

    #[error("document {id:?}: {message}")]
    InvalidDocument { id: String, message: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid date range: {from} is after {to}")]
    InvalidDateRange {
        from: chrono::NaiveDate,
        to: chrono::NaiveDate,
    },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("smoothing window must be odd and positive, got {0}")]
    InvalidWindow(usize),

    #[error("invalid lifecycle template: {0}")]
    InvalidTemplate(String),

    #[error("scale must be at least 2, got {0}")]
    InvalidScale(usize),

    #[error("window (shift {shift}, scale {scale}) exceeds series length {len}")]
    OutOfRange { shift: usize, scale: usize, len: usize },

    #[error("template has {got} samples, expected {expected}")]
    TemplateLength { expected: usize, got: usize },

    #[error("correlogram grid has no {0}")]
    EmptyGrid(&'static str),

    #[error("every document is empty after tokenization")]
    NoTerms,

    #[error("lexicon is empty")]
    EmptyLexicon,

    #[error("line {line}: lexicon entry {entry:?} has no tokens")]
    InvalidLexiconEntry { line: usize, entry: String },

    #[error("no event terms")]
    NoEventTerms,

    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
