use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8 (first invalid byte at offset {offset})")]
    InvalidUtf8 { path: PathBuf, offset: usize },
    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),
    #[error("malformed manifest line {line} in {path}: expected `id<TAB>path`")]
    MalformedManifest { path: PathBuf, line: usize },
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("every document in the corpus is empty")]
    AllDocumentsEmpty,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("observed cell (word {word}, document {doc}) has zero probability under the model")]
    ZeroProbability { word: usize, doc: usize },
    #[error("invalid probability vector: {0}")]
    InvalidSimplex(String),
    #[error("malformed artifact {path}: {detail}")]
    ParseArtifact { path: PathBuf, detail: String },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
