//! Answerability of a query from one cached segment and its rewrite into
//! local and remainder parts.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;

use crate::predicate::{Blowup, Dnf};
use crate::query::Query;
use crate::schema::Catalog;
use crate::store::{SegmentId, SegmentIndexEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Full,
    Partial,
    Unanswerable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnswerabilityVerdict {
    pub verdict: Verdict,
    /// The segment lacks some predicate attributes but determines them
    /// through functional dependencies.
    pub requires_extension: bool,
}

impl AnswerabilityVerdict {
    const NONE: Self = Self {
        verdict: Verdict::Unanswerable,
        requires_extension: false,
    };
}

/// Classifies how much of `q` the segment `s` can answer. Predicate
/// attributes missing from the segment must be derivable through the
/// class's dependencies, otherwise the query is unanswerable from `s`.
pub fn answerability(s: &SegmentIndexEntry, q: &Query, catalog: &Catalog) -> AnswerabilityVerdict {
    classify(s, q, |attrs| catalog.attribute_closure(&s.class, attrs).ok())
}

/// As [`answerability`], but with no dependencies at all (not even the key).
pub fn answerability_without_dependencies(s: &SegmentIndexEntry, q: &Query) -> AnswerabilityVerdict {
    classify(s, q, |attrs| Some(attrs.clone()))
}

fn classify(
    s: &SegmentIndexEntry,
    q: &Query,
    closure: impl Fn(&BTreeSet<String>) -> Option<BTreeSet<String>>,
) -> AnswerabilityVerdict {
    if s.class != q.class() || !q.pred().intersects(&s.pred) {
        return AnswerabilityVerdict::NONE;
    }
    let pred_attrs = q.predicate_attrs();
    let mut requires_extension = false;
    if !pred_attrs.is_subset(&s.attrs) {
        match closure(&s.attrs) {
            Some(c) if pred_attrs.is_subset(&c) => requires_extension = true,
            _ => return AnswerabilityVerdict::NONE,
        }
    }
    let verdict = if q.attrs().is_subset(&s.attrs) && q.pred().implies(&s.pred) {
        Verdict::Full
    } else {
        Verdict::Partial
    };
    AnswerabilityVerdict {
        verdict,
        requires_extension,
    }
}

/// The rewrite case, from fully local (1) to backend only (5).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseType {
    /// Attributes and predicate contained: answered locally.
    Case1 = 1,
    /// Attributes contained, predicate overlaps: local part plus a row remainder.
    Case2 = 2,
    /// Predicate contained, attributes missing: local part joined with fetched attributes.
    Case3 = 3,
    /// Both missing: joined local part plus a row remainder.
    Case4 = 4,
    /// Nothing usable: the whole query goes to the backend.
    Case5 = 5,
}

impl CaseType {
    pub const ALL: [CaseType; 5] = [Self::Case1, Self::Case2, Self::Case3, Self::Case4, Self::Case5];

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for CaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// The part of a query evaluated against segment content.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalQuery {
    pub segment: SegmentId,
    pub project_attrs: BTreeSet<String>,
    pub local_filter: Dnf,
    /// Local rows must additionally be semijoined with the amending keys.
    pub needs_semijoin_on_aq: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteOutcome {
    pub case: CaseType,
    pub lq: Option<LocalQuery>,
    pub aq: Option<Query>,
    pub rq1: Option<Query>,
    pub rq2: Option<Query>,
}

impl RewriteOutcome {
    pub fn miss(q: &Query) -> Self {
        Self {
            case: CaseType::Case5,
            lq: None,
            aq: None,
            rq1: Some(Query::unchecked(q.class(), q.attrs().clone(), q.pred().clone())),
            rq2: None,
        }
    }

    /// `CASE=<n> SEG=<name> LQ=<attrs/filter> AQ=<pred|-> RQ1=<query|-> RQ2=<query|->`
    pub fn trace_line(&self) -> String {
        let dash = || "-".to_string();
        let (seg, lq) = match &self.lq {
            Some(lq) => (
                lq.segment.to_string(),
                format!(
                    "{{{}}}/{}",
                    lq.project_attrs.iter().cloned().collect::<Vec<_>>().join(","),
                    lq.local_filter
                ),
            ),
            None => (dash(), dash()),
        };
        format!(
            "CASE={} SEG={} LQ={} AQ={} RQ1={} RQ2={}",
            self.case,
            seg,
            lq,
            self.aq.as_ref().map_or_else(dash, |a| a.pred().to_string()),
            self.rq1.as_ref().map_or_else(dash, Query::format),
            self.rq2.as_ref().map_or_else(dash, Query::format),
        )
    }
}

/// Rewrites `q` against segment `s`. Any blowup while forming the remainder
/// predicates downgrades to Case 5.
pub fn rewrite(q: &Query, s: &SegmentIndexEntry, catalog: &Catalog, cap: usize) -> RewriteOutcome {
    let Ok(schema) = catalog.class(q.class()) else {
        return RewriteOutcome::miss(q);
    };
    let key = schema.primary_key();
    if s.class != q.class() || !key.is_subset(&s.attrs) || !q.pred().intersects(&s.pred) {
        return RewriteOutcome::miss(q);
    }
    plan(q, s, key, cap).unwrap_or_else(|_| RewriteOutcome::miss(q))
}

fn plan(q: &Query, s: &SegmentIndexEntry, key: &BTreeSet<String>, cap: usize) -> Result<RewriteOutcome, Blowup> {
    let (qa, qp, sa, sp) = (q.attrs(), q.pred(), &s.attrs, &s.pred);
    let class = q.class();
    let pred_local = q.predicate_attrs().is_subset(sa);
    let contained = qp.implies(sp);
    let with_key = |a: BTreeSet<String>| &a | key;
    let fetch = |attrs: BTreeSet<String>, pred: Dnf| Some(Query::unchecked(class, attrs, pred));

    let outcome = if qa.is_subset(sa) {
        let aq_needed = !pred_local && !sp.implies(qp);
        let lq = LocalQuery {
            segment: s.id,
            project_attrs: with_key(qa.clone()),
            local_filter: qp.restrict_to(sa),
            needs_semijoin_on_aq: aq_needed,
        };
        if contained {
            RewriteOutcome {
                case: CaseType::Case1,
                lq: Some(lq),
                aq: if aq_needed { fetch(key.clone(), qp.clone()) } else { None },
                rq1: None,
                rq2: None,
            }
        } else {
            let rest = qp.and(&sp.negate(cap)?, cap)?;
            let aq = if aq_needed { fetch(key.clone(), qp.and(sp, cap)?) } else { None };
            RewriteOutcome {
                case: CaseType::Case2,
                lq: Some(lq),
                aq,
                rq1: fetch(with_key(qa.clone()), rest),
                rq2: None,
            }
        }
    } else {
        let a1 = with_key(qa & sa);
        let a2 = with_key(qa - sa);
        let lq = LocalQuery {
            segment: s.id,
            project_attrs: a1,
            local_filter: if pred_local { qp.clone() } else { Dnf::always() },
            needs_semijoin_on_aq: false,
        };
        if contained {
            RewriteOutcome {
                case: CaseType::Case3,
                lq: Some(lq),
                aq: None,
                rq1: fetch(a2, qp.clone()),
                rq2: None,
            }
        } else {
            let rest = qp.and(&sp.negate(cap)?, cap)?;
            let inside = qp.and(sp, cap)?;
            RewriteOutcome {
                case: CaseType::Case4,
                lq: Some(lq),
                aq: None,
                rq1: fetch(with_key(qa.clone()), rest),
                rq2: fetch(a2, inside),
            }
        }
    };
    Ok(outcome)
}

/// Picks the candidate with the lowest rewrite case, then the most shared
/// projected attributes, then the most recent visit. Returns `None` when
/// every candidate yields Case 5.
pub fn select_best_segment<'a>(
    q: &Query,
    candidates: &[&'a SegmentIndexEntry],
    catalog: &Catalog,
    cap: usize,
) -> Option<(&'a SegmentIndexEntry, RewriteOutcome)> {
    candidates
        .iter()
        .map(|s| (*s, rewrite(q, s, catalog, cap)))
        .filter(|(_, o)| o.case != CaseType::Case5)
        .min_by_key(|(s, o)| {
            (
                o.case,
                Reverse(q.attrs().intersection(&s.attrs).count()),
                Reverse(s.timestamp),
                Reverse(s.id),
            )
        })
}
