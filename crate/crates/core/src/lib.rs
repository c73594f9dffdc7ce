//! A semantic query cache for select-project queries.
//!
//! Query results are cached as annotated segments `<class, attributes,
//! predicate, content>`. A new query is rewritten against the best cached
//! segment into a local part answered from cache pages and remainder parts
//! fetched from the backend relational store (five rewrite cases). The cache
//! keeps its segments pairwise disjoint and evicts least-recently-visited
//! segments when pages run out.

pub mod backend;
pub mod cli;
pub mod engine;
pub mod error;
mod lexer;
pub mod predicate;
pub mod query;
pub mod rewrite;
pub mod schema;
pub mod store;
pub mod value;
pub mod workload;

#[cfg(test)]
mod testutil;

pub use backend::{Backend, BackendStats, Relation};
pub use engine::{AnswerReport, Engine, EngineStats};
pub use error::{Error, ParseError, Result};
pub use predicate::{Blowup, CompareOp, ComparePredicate, Conjunct, Dnf, Interval, DEFAULT_BLOWUP_CAP};
pub use query::Query;
pub use rewrite::{AnswerabilityVerdict, CaseType, LocalQuery, RewriteOutcome, Verdict};
pub use schema::{AttributeDef, Catalog, ClassSchema, FunctionalDependency};
pub use store::{CacheConfig, InsertOutcome, SegmentId, SegmentIndexEntry, SemanticCache};
pub use value::{Tuple, Value, ValueKind};
