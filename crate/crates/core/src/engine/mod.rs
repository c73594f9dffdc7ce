//! Query lifecycle from cache probe to answer assembly and cache feedback.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::predicate::Dnf;
use crate::query::Query;
use crate::rewrite::{select_best_segment, CaseType, RewriteOutcome};
use crate::schema::Catalog;
use crate::store::{CacheConfig, InsertOutcome, SegmentId, SemanticCache};
use crate::value::Tuple;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerReport {
    /// Sorted, duplicate-free answer tuples carrying exactly the projection.
    pub answer: Vec<Tuple>,
    pub case: CaseType,
    pub segment_used: Option<SegmentId>,
    /// Tuples returned by the backend for the answer plan.
    pub backend_tuples: u64,
    /// Tuples fetched from the backend to refresh the cache afterwards.
    pub feedback_tuples: u64,
    /// Tuples scanned from the probed segment.
    pub local_tuples: u64,
    pub inserted_segments: Vec<SegmentId>,
    pub trace: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineStats {
    pub queries: u64,
    pub full_hits: u64,
    pub partial_hits: u64,
    pub misses: u64,
    pub backend_tuples_total: u64,
    pub saved_tuples_estimate: i64,
    pub case_counts: [u64; 5],
    pub evictions: u64,
}

impl EngineStats {
    /// Share of queries answered at least partially from cache, to 4 places.
    pub fn hit_ratio(&self) -> f64 {
        if self.queries == 0 {
            return 0.0;
        }
        let r = (self.full_hits + self.partial_hits) as f64 / self.queries as f64;
        (r * 10_000.0).round() / 10_000.0
    }

    /// The stats document written by the command-line tool.
    pub fn to_json(&self) -> serde_json::Value {
        let cases: serde_json::Map<_, _> = CaseType::ALL
            .iter()
            .map(|c| (c.to_string(), self.case_counts[c.number() as usize - 1].into()))
            .collect();
        serde_json::json!({
            "queries": self.queries,
            "full_hits": self.full_hits,
            "partial_hits": self.partial_hits,
            "misses": self.misses,
            "hit_ratio": self.hit_ratio(),
            "backend_tuples_total": self.backend_tuples_total,
            "saved_tuples_estimate": self.saved_tuples_estimate,
            "case_counts": cases,
            "evictions": self.evictions,
        })
    }
}

/// Monotone logical time used for segment visit stamps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalClock {
    counter: u64,
}

impl LogicalClock {
    pub fn now(&self) -> u64 {
        self.counter
    }

    pub fn tick(&mut self) -> u64 {
        self.counter += 1;
        self.counter
    }
}

#[derive(Serialize, Deserialize)]
struct SavedState {
    clock: LogicalClock,
    stats: EngineStats,
}

/// Backend results gathered for one rewrite plan.
#[derive(Default)]
struct Fetched {
    local: Vec<Tuple>,
    scanned: u64,
    aq: Option<Vec<Tuple>>,
    rq1: Option<Vec<Tuple>>,
    rq2: Option<Vec<Tuple>>,
}

impl Fetched {
    fn backend_tuples(&self) -> u64 {
        [&self.aq, &self.rq1, &self.rq2]
            .iter()
            .filter_map(|r| r.as_ref())
            .map(|r| r.len() as u64)
            .sum()
    }
}

pub struct Engine {
    catalog: Arc<Catalog>,
    backend: Backend,
    cache: SemanticCache,
    clock: LogicalClock,
    stats: EngineStats,
}

impl Engine {
    pub fn new(backend: Backend, config: CacheConfig) -> Result<Self> {
        let catalog = backend.catalog().clone();
        let cache = SemanticCache::new(catalog.clone(), config)?;
        Ok(Self {
            catalog,
            backend,
            cache,
            clock: LogicalClock::default(),
            stats: EngineStats::default(),
        })
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn cache(&self) -> &SemanticCache {
        &self.cache
    }

    pub fn cache_mut(&mut self) -> &mut SemanticCache {
        &mut self.cache
    }

    pub fn clock(&self) -> u64 {
        self.clock.now()
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats {
            evictions: self.cache.evictions(),
            ..self.stats.clone()
        }
    }

    /// Cache image including the clock and statistics.
    pub fn dump(&self) -> Vec<u8> {
        let state = SavedState {
            clock: self.clock,
            stats: self.stats.clone(),
        };
        self.cache.dump(&serde_json::to_vec(&state).expect("state serializes"))
    }

    /// Restores an engine from [`Engine::dump`] output over `backend`.
    pub fn load(backend: Backend, image: &[u8]) -> Result<Self> {
        let catalog = backend.catalog().clone();
        let (cache, extra) = SemanticCache::load(image, catalog.clone())?;
        let state: SavedState =
            serde_json::from_slice(&extra).map_err(|e| Error::CorruptImage(format!("engine state: {e}")))?;
        Ok(Self {
            catalog,
            backend,
            cache,
            clock: state.clock,
            stats: state.stats,
        })
    }

    /// Answers `q`. Failures on the cached path degrade to a full backend
    /// fetch; the answer always equals direct backend execution.
    pub fn answer(&mut self, q: &Query) -> Result<AnswerReport> {
        let key = self.catalog.class(q.class())?.primary_key().clone();
        let now = self.clock.tick();
        let cap = self.cache.config().blowup_cap;

        let probed = {
            let candidates = self.cache.lookup_candidates(q);
            select_best_segment(q, &candidates, &self.catalog, cap).map(|(s, o)| (s.id, o))
        };
        let cached = probed.and_then(|(id, outcome)| {
            let fetched = self.execute(&outcome).ok()?;
            let answer = assemble(&outcome, q, &key, &fetched).ok()?;
            Some((id, outcome, fetched, answer))
        });
        let (segment_used, outcome, fetched, answer) = match cached {
            Some((id, o, f, a)) => (Some(id), o, f, a),
            None => {
                let outcome = RewriteOutcome::miss(q);
                let fetched = self.execute(&outcome)?;
                let answer = assemble(&outcome, q, &key, &fetched)?;
                (None, outcome, fetched, answer)
            }
        };
        if let Some(id) = segment_used {
            self.cache.touch(id, now)?;
        }

        let needs_feedback = !(outcome.case == CaseType::Case1 && outcome.aq.is_none());
        let (inserted_segments, feedback_tuples) = if needs_feedback {
            self.coalesce(q, &key, now)
        } else {
            (Vec::new(), 0)
        };

        let backend_tuples = fetched.backend_tuples();
        let s = &mut self.stats;
        s.queries += 1;
        match outcome.case {
            CaseType::Case1 => s.full_hits += 1,
            CaseType::Case5 => s.misses += 1,
            _ => s.partial_hits += 1,
        }
        s.case_counts[outcome.case.number() as usize - 1] += 1;
        s.backend_tuples_total += backend_tuples + feedback_tuples;
        s.saved_tuples_estimate += answer.len() as i64 - backend_tuples as i64;

        Ok(AnswerReport {
            trace: outcome.trace_line(),
            answer,
            case: outcome.case,
            segment_used,
            backend_tuples,
            feedback_tuples,
            local_tuples: fetched.scanned,
            inserted_segments,
        })
    }

    fn execute(&self, outcome: &RewriteOutcome) -> Result<Fetched> {
        let mut f = Fetched::default();
        if let Some(lq) = &outcome.lq {
            let rows = self.cache.scan_segment(lq.segment)?;
            f.scanned = rows.len() as u64;
            for t in rows {
                if lq.local_filter.eval(&t)? {
                    f.local.push(project(&t, &lq.project_attrs)?);
                }
            }
        }
        let run = |q: &Option<Query>| q.as_ref().map(|q| self.backend.execute(q)).transpose();
        f.aq = run(&outcome.aq)?;
        f.rq1 = run(&outcome.rq1)?;
        f.rq2 = run(&outcome.rq2)?;
        Ok(f)
    }

    /// Folds the query region and every overlapping segment of its class
    /// into one segment holding all their attributes. Best effort: any
    /// failure leaves the cache as it was.
    fn coalesce(&mut self, q: &Query, key: &BTreeSet<String>, now: u64) -> (Vec<SegmentId>, u64) {
        let cap = self.cache.config().blowup_cap;
        let class = q.class();
        let overlapping = |region: &Dnf, cache: &SemanticCache| -> Vec<SegmentId> {
            cache
                .entries()
                .filter(|e| e.class == class && e.pred.intersects(region))
                .map(|e| e.id)
                .collect()
        };

        let mut victims = overlapping(q.pred(), &self.cache);
        let region = loop {
            let preds: Vec<&Dnf> = victims.iter().map(|v| &self.cache.entry(*v).expect("live").pred).collect();
            let exact = preds.iter().try_fold(q.pred().clone(), |acc, p| acc.or(p, cap));
            let region = exact.unwrap_or_else(|_| {
                let all = preds.iter().flat_map(|p| p.disjuncts().iter().cloned());
                Dnf::from_conjuncts(q.pred().disjuncts().iter().cloned().chain(all)).hull()
            });
            let grown = overlapping(&region, &self.cache);
            if grown.len() == victims.len() {
                break region;
            }
            victims = grown;
        };

        let mut attrs: BTreeSet<String> = q.attrs() | key;
        attrs.extend(q.predicate_attrs());
        for v in &victims {
            attrs.extend(self.cache.entry(*v).expect("live").attrs.iter().cloned());
        }

        let mut rows: BTreeMap<Vec<crate::value::Value>, Tuple> = BTreeMap::new();
        let mut add = |t: Tuple| {
            rows.insert(key.iter().map(|k| t[k].clone()).collect(), t);
        };
        let mut covered = Dnf::never();
        for v in &victims {
            let e = self.cache.entry(*v).expect("live");
            if e.attrs != attrs {
                continue;
            }
            let Ok(tuples) = self.cache.scan_segment(*v) else { continue };
            let Ok(wider) = covered.or(&e.pred, cap) else { continue };
            covered = wider;
            tuples.into_iter().for_each(&mut add);
        }
        let missing = covered
            .negate(cap)
            .and_then(|n| region.and(&n, cap))
            .unwrap_or_else(|_| region.clone());
        let mut fetched = 0;
        if missing.is_satisfiable() {
            let Ok(tuples) = self.backend.execute(&Query::unchecked(class, attrs.clone(), missing)) else {
                return (Vec::new(), 0);
            };
            fetched = tuples.len() as u64;
            tuples.into_iter().for_each(&mut add);
        }
        let tuples: Vec<Tuple> = rows.into_values().collect();
        match self.cache.absorb(class, &victims, &attrs, &region, &tuples, now) {
            Ok(InsertOutcome::Stored(id)) => (vec![id], fetched),
            _ => (Vec::new(), fetched),
        }
    }
}

fn project(t: &Tuple, attrs: &BTreeSet<String>) -> Result<Tuple> {
    attrs
        .iter()
        .map(|a| t.get(a).map(|v| (a.clone(), v.clone())).ok_or_else(|| Error::MissingValue(a.clone())))
        .collect()
}

fn key_of(t: &Tuple, key: &BTreeSet<String>) -> Result<Tuple> {
    project(t, key)
}

/// Joins `left` with `right` on the key, merging matching tuples.
fn join(left: &[Tuple], right: &[Tuple], key: &BTreeSet<String>) -> Result<Vec<Tuple>> {
    let index: BTreeMap<Tuple, &Tuple> = right.iter().map(|r| Ok((key_of(r, key)?, r))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for l in left {
        if let Some(r) = index.get(&key_of(l, key)?) {
            let mut merged = l.clone();
            merged.extend(r.iter().map(|(k, v)| (k.clone(), v.clone())));
            out.push(merged);
        }
    }
    Ok(out)
}

/// Combines the parts of a rewrite plan into the answer to `q`.
fn assemble(outcome: &RewriteOutcome, q: &Query, key: &BTreeSet<String>, f: &Fetched) -> Result<Vec<Tuple>> {
    let part = |r: &Option<Vec<Tuple>>| r.clone().unwrap_or_default();
    let mut rows: Vec<Tuple> = match outcome.case {
        CaseType::Case1 | CaseType::Case2 => {
            let mut local = match &f.aq {
                Some(keys) => {
                    let keys: BTreeSet<Tuple> = keys.iter().map(|k| key_of(k, key)).collect::<Result<_>>()?;
                    let mut kept = Vec::new();
                    for t in &f.local {
                        if keys.contains(&key_of(t, key)?) {
                            kept.push(t.clone());
                        }
                    }
                    kept
                }
                None => f.local.clone(),
            };
            local.extend(part(&f.rq1));
            local
        }
        CaseType::Case3 => join(&f.local, &part(&f.rq1), key)?,
        CaseType::Case4 => {
            let mut joined = join(&f.local, &part(&f.rq2), key)?;
            joined.extend(part(&f.rq1));
            joined
        }
        CaseType::Case5 => part(&f.rq1),
    };
    let answer: BTreeSet<Tuple> = rows.drain(..).map(|t| project(&t, q.attrs())).collect::<Result<_>>()?;
    Ok(answer.into_iter().collect())
}

#[cfg(test)]
mod tests;
