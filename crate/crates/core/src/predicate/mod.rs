//! Selection predicates as DNF formulas over per-attribute intervals.

mod conjunct;
mod dnf;
mod interval;
mod parse;

use std::fmt;

pub use conjunct::Conjunct;
pub use dnf::Dnf;
pub use interval::{Bound, Interval};
pub(crate) use parse::parse_dnf;

use crate::lexer::render_name;
use crate::value::Value;

/// Default limit on the number of disjuncts `and`/`or`/`negate` may produce.
pub const DEFAULT_BLOWUP_CAP: usize = 64;

/// Raised when a predicate operation would exceed the disjunct cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("predicate exceeds the cap of {cap} disjuncts")]
pub struct Blowup {
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompareOp {
    Eq,
    Lt,
    Gt,
    Ge,
    Le,
}

impl CompareOp {
    pub const ALL: [CompareOp; 5] = [CompareOp::Eq, CompareOp::Lt, CompareOp::Gt, CompareOp::Ge, CompareOp::Le];

    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Le => "<=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        CompareOp::ALL.into_iter().find(|op| op.symbol() == s)
    }

    /// The set of values satisfying `x op c`.
    pub fn interval(self, c: Value) -> Option<Interval> {
        match self {
            CompareOp::Eq => Some(Interval::point(c)),
            CompareOp::Lt => Interval::new(Bound::Unbounded, Bound::Exclusive(c)),
            CompareOp::Le => Interval::new(Bound::Unbounded, Bound::Inclusive(c)),
            CompareOp::Gt => Interval::new(Bound::Exclusive(c), Bound::Unbounded),
            CompareOp::Ge => Interval::new(Bound::Inclusive(c), Bound::Unbounded),
        }
    }
}

/// `attribute op constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComparePredicate {
    pub attribute: String,
    pub op: CompareOp,
    pub constant: Value,
}

impl ComparePredicate {
    pub fn new(attribute: impl Into<String>, op: CompareOp, constant: Value) -> Self {
        Self {
            attribute: attribute.into(),
            op,
            constant,
        }
    }
}

impl fmt::Display for ComparePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            render_name(&self.attribute, '"'),
            self.op.symbol(),
            self.constant.to_literal()
        )
    }
}
