use std::fmt;

use crate::predicate::Blowup;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A syntax error in catalog, query or workload text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("duplicate attribute `{attribute}` in class `{class}`")]
    DuplicateAttribute { class: String, attribute: String },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown attribute `{attribute}` in class `{class}`")]
    UnknownAttribute { class: String, attribute: String },
    #[error("class `{0}` must declare a non-empty primary key")]
    MissingKey(String),
    #[error("functional dependency in class `{0}` has an empty side")]
    EmptyDependency(String),
    #[error("attribute `{attribute}` expects {expected} but got {found}")]
    KindMismatch {
        attribute: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("tuple has no value for attribute `{0}`")]
    MissingValue(String),
    #[error("query must project at least one attribute")]
    EmptyProjection,
    #[error(transparent)]
    Blowup(#[from] Blowup),
    #[error("csv error in `{class}` at row {row}, column {column}: {message}")]
    Csv {
        class: String,
        row: usize,
        column: usize,
        message: String,
    },
    #[error("csv header for `{class}` does not match its attributes: {message}")]
    HeaderMismatch { class: String, message: String },
    #[error("duplicate primary key in `{class}` at row {row}")]
    DuplicateKey { class: String, row: usize },
    #[error("class `{0}` has no loaded relation")]
    RelationNotLoaded(String),
    #[error("not enough free pages: need {needed}, {free} free")]
    InsufficientSpace { needed: usize, free: usize },
    #[error("unknown segment {0}")]
    UnknownSegment(String),
    #[error("page {page} failed its checksum")]
    Checksum { page: u32 },
    #[error("corrupt cache image: {0}")]
    CorruptImage(String),
    #[error("segment predicate overlaps segment {0}")]
    Overlap(String),
    #[error("tuple violates the segment predicate")]
    ContentViolation,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {source}")]
    Workload {
        path: String,
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("answer diverges from the backend at query {index}: {query}")]
    Divergence { index: usize, query: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
