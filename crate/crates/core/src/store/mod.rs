//! Page-based semantic cache with a disjoint segment index and LRU eviction.

mod codec;
mod page;
mod persist;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::predicate::{Dnf, DEFAULT_BLOWUP_CAP};
use crate::query::Query;
use crate::schema::Catalog;
use crate::value::Tuple;

pub use page::{Page, PageId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheConfig {
    pub page_capacity_bytes: usize,
    pub total_pages: usize,
    pub blowup_cap: usize,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self {
            page_capacity_bytes: 4096,
            total_pages: 256,
            blowup_cap: DEFAULT_BLOWUP_CAP,
        }
    }
}

impl CacheConfig {
    pub fn validate(&self) -> Result<()> {
        if self.page_capacity_bytes == 0 || self.total_pages == 0 || self.blowup_cap == 0 {
            return Err(Error::Config("page capacity, page count and blowup cap must be positive".into()));
        }
        if self.total_pages > u32::MAX as usize || self.page_capacity_bytes > u32::MAX as usize {
            return Err(Error::Config("page count and capacity must fit in 32 bits".into()));
        }
        Ok(())
    }
}

/// Segment identifier; displayed as `S<n>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId(pub u64);

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentIndexEntry {
    pub id: SegmentId,
    pub class: String,
    pub attrs: BTreeSet<String>,
    pub pred: Dnf,
    pub first_page: PageId,
    pub timestamp: u64,
    pub tuple_count: usize,
    pub page_count: usize,
}

impl SegmentIndexEntry {
    pub fn name(&self) -> String {
        self.id.to_string()
    }
}

/// Two entries share no information when their classes, attributes or
/// predicates do not meet.
pub fn disjoint(a: &SegmentIndexEntry, b: &SegmentIndexEntry) -> bool {
    a.class != b.class || a.attrs.is_disjoint(&b.attrs) || !a.pred.intersects(&b.pred)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// Existing segments already cover the whole predicate.
    Covered,
    /// No tuple survived the residual predicate.
    Empty,
    /// Residual computation exceeded the blowup cap.
    Blowup,
    /// A single tuple does not fit in one page.
    TupleTooLarge,
    /// The segment needs more pages than the cache holds.
    TooLarge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    Stored(SegmentId),
    Rejected(RejectReason),
}

impl InsertOutcome {
    pub fn stored(&self) -> Option<SegmentId> {
        match self {
            InsertOutcome::Stored(id) => Some(*id),
            InsertOutcome::Rejected(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SemanticCache {
    catalog: Arc<Catalog>,
    config: CacheConfig,
    pages: Vec<Page>,
    free: BTreeSet<PageId>,
    index: BTreeMap<SegmentId, SegmentIndexEntry>,
    next_id: u64,
    evictions: u64,
}

impl SemanticCache {
    pub fn new(catalog: Arc<Catalog>, config: CacheConfig) -> Result<Self> {
        config.validate()?;
        let n = config.total_pages as PageId;
        Ok(Self {
            catalog,
            config,
            pages: (0..n).map(Page::blank).collect(),
            free: (0..n).collect(),
            index: BTreeMap::new(),
            next_id: 1,
            evictions: 0,
        })
    }

    pub fn config(&self) -> &CacheConfig {
        &self.config
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn free_pages(&self) -> usize {
        self.free.len()
    }

    pub fn evictions(&self) -> u64 {
        self.evictions
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn pages(&self) -> &[Page] {
        &self.pages
    }

    /// Index entries in id order.
    pub fn entries(&self) -> impl Iterator<Item = &SegmentIndexEntry> {
        self.index.values()
    }

    pub fn entry(&self, id: SegmentId) -> Option<&SegmentIndexEntry> {
        self.index.get(&id)
    }

    fn entry_or_err(&self, id: SegmentId) -> Result<&SegmentIndexEntry> {
        self.index.get(&id).ok_or_else(|| Error::UnknownSegment(id.to_string()))
    }

    /// Takes the `n` lowest-numbered free pages.
    pub fn allocate_pages(&mut self, n: usize) -> Result<Vec<PageId>> {
        if n > self.free.len() {
            return Err(Error::InsufficientSpace {
                needed: n,
                free: self.free.len(),
            });
        }
        Ok((0..n).map(|_| self.free.pop_first().expect("checked length")).collect())
    }

    fn chain(&self, e: &SegmentIndexEntry) -> Vec<PageId> {
        let mut out = Vec::with_capacity(e.page_count);
        let mut cur = Some(e.first_page);
        while let Some(p) = cur {
            if out.len() == e.page_count {
                break;
            }
            out.push(p);
            cur = self.pages[p as usize].next();
        }
        out
    }

    pub fn deallocate_segment(&mut self, id: SegmentId) -> Result<SegmentIndexEntry> {
        let e = self.index.remove(&id).ok_or_else(|| Error::UnknownSegment(id.to_string()))?;
        for p in self.chain(&e) {
            self.pages[p as usize].clear();
            self.free.insert(p);
        }
        self.debug_check();
        Ok(e)
    }

    /// Entries of the query's class, most recently visited first.
    pub fn lookup_candidates(&self, q: &Query) -> Vec<&SegmentIndexEntry> {
        let mut out: Vec<_> = self.index.values().filter(|e| e.class == q.class()).collect();
        out.sort_by(|a, b| b.timestamp.cmp(&a.timestamp).then(b.id.cmp(&a.id)));
        out
    }

    pub fn touch(&mut self, id: SegmentId, now: u64) -> Result<()> {
        let e = self.index.get_mut(&id).ok_or_else(|| Error::UnknownSegment(id.to_string()))?;
        e.timestamp = now;
        Ok(())
    }

    /// Evicts least recently visited segments (ties by id) until at least
    /// `pages_needed` pages are free.
    pub fn evict_until(&mut self, pages_needed: usize) -> Vec<SegmentId> {
        let mut evicted = Vec::new();
        while self.free.len() < pages_needed {
            let Some(victim) = self.index.values().min_by_key(|e| (e.timestamp, e.id)).map(|e| e.id) else {
                break;
            };
            self.deallocate_segment(victim).expect("victim exists");
            self.evictions += 1;
            evicted.push(victim);
        }
        evicted
    }

    pub fn scan_segment(&self, id: SegmentId) -> Result<Vec<Tuple>> {
        let e = self.entry_or_err(id)?;
        let mut out = Vec::with_capacity(e.tuple_count);
        for p in self.chain(e) {
            out.extend(self.pages[p as usize].rows(&e.attrs)?);
        }
        Ok(out)
    }

    /// Attributes a result must carry to be inserted for `(class, attrs, pred)`.
    /// Covers the key and every attribute the residual predicate mentions.
    pub fn required_attrs(&self, class: &str, attrs: &BTreeSet<String>, pred: &Dnf) -> Result<BTreeSet<String>> {
        let schema = self.catalog.class(class)?;
        let mut out: BTreeSet<String> = attrs | schema.primary_key();
        out.extend(pred.attrs());
        for e in self.index.values().filter(|e| e.class == class && e.pred.intersects(pred)) {
            out.extend(e.pred.attrs());
        }
        Ok(out)
    }

    /// Stores a query result. The predicate is first reduced by every
    /// overlapping same-class segment so the index stays disjoint.
    pub fn insert_segment(
        &mut self,
        class: &str,
        attrs: &BTreeSet<String>,
        pred: &Dnf,
        tuples: &[Tuple],
        now: u64,
    ) -> Result<InsertOutcome> {
        let schema = self.catalog.class(class)?;
        schema.check_attrs(attrs)?;
        schema.check_attrs(&pred.attrs())?;
        let cap = self.config.blowup_cap;
        let mut stored: BTreeSet<String> = attrs | schema.primary_key();
        let mut residual = pred.clone();
        for e in self.index.values() {
            if e.class != class || e.attrs.is_disjoint(&stored) || !e.pred.intersects(&residual) {
                continue;
            }
            let step = e.pred.negate(cap).and_then(|neg| residual.and(&neg, cap));
            match step {
                Ok(r) => residual = r,
                Err(_) => return Ok(InsertOutcome::Rejected(RejectReason::Blowup)),
            }
            if residual.is_false() {
                return Ok(InsertOutcome::Rejected(RejectReason::Covered));
            }
        }
        if !residual.is_satisfiable() {
            return Ok(InsertOutcome::Rejected(RejectReason::Covered));
        }
        stored.extend(residual.attrs());
        let mut rows = BTreeSet::new();
        for t in tuples {
            if residual.eval(t)? {
                rows.insert(project(t, &stored)?);
            }
        }
        if rows.is_empty() {
            return Ok(InsertOutcome::Rejected(RejectReason::Empty));
        }
        self.write_segment(class, stored, residual, rows, now)
    }

    /// Replaces `victims` by one segment `(attrs ∪ key ∪ pred attrs, pred)`
    /// holding `tuples`. The new predicate must not overlap any other
    /// segment of the class. Empty content is allowed.
    pub fn absorb(
        &mut self,
        class: &str,
        victims: &[SegmentId],
        attrs: &BTreeSet<String>,
        pred: &Dnf,
        tuples: &[Tuple],
        now: u64,
    ) -> Result<InsertOutcome> {
        let schema = self.catalog.class(class)?;
        schema.check_attrs(attrs)?;
        schema.check_attrs(&pred.attrs())?;
        for v in victims {
            if self.entry_or_err(*v)?.class != class {
                return Err(Error::Config(format!("segment {v} belongs to another class")));
            }
        }
        if let Some(e) = self
            .index
            .values()
            .find(|e| e.class == class && !victims.contains(&e.id) && e.pred.intersects(pred))
        {
            return Err(Error::Overlap(e.name()));
        }
        if !pred.is_satisfiable() {
            return Ok(InsertOutcome::Rejected(RejectReason::Covered));
        }
        let mut stored: BTreeSet<String> = attrs | schema.primary_key();
        stored.extend(pred.attrs());
        let mut rows = BTreeSet::new();
        for t in tuples {
            if !pred.eval(t)? {
                return Err(Error::ContentViolation);
            }
            rows.insert(project(t, &stored)?);
        }
        let Some(payloads) = self.encode(&stored, &rows)? else {
            return Ok(InsertOutcome::Rejected(RejectReason::TupleTooLarge));
        };
        if payloads.len().max(1) > self.config.total_pages {
            return Ok(InsertOutcome::Rejected(RejectReason::TooLarge));
        }
        for v in victims {
            self.deallocate_segment(*v)?;
        }
        Ok(self.place(class, stored, pred.clone(), rows.len(), payloads, now))
    }

    fn write_segment(
        &mut self,
        class: &str,
        stored: BTreeSet<String>,
        pred: Dnf,
        rows: BTreeSet<Tuple>,
        now: u64,
    ) -> Result<InsertOutcome> {
        let Some(payloads) = self.encode(&stored, &rows)? else {
            return Ok(InsertOutcome::Rejected(RejectReason::TupleTooLarge));
        };
        if payloads.len() > self.config.total_pages {
            return Ok(InsertOutcome::Rejected(RejectReason::TooLarge));
        }
        Ok(self.place(class, stored, pred, rows.len(), payloads, now))
    }

    /// Encodes rows into page payloads; `None` if some row exceeds a page.
    fn encode(&self, attrs: &BTreeSet<String>, rows: &BTreeSet<Tuple>) -> Result<Option<Vec<Vec<u8>>>> {
        let cap = self.config.page_capacity_bytes;
        let mut encoded = Vec::with_capacity(rows.len());
        for r in rows {
            let bytes = page::encode_row(r, attrs)?;
            if page::frame_len(&bytes) > cap {
                return Ok(None);
            }
            encoded.push(bytes);
        }
        Ok(Some(page::pack(&encoded, cap)))
    }

    /// Evicts as needed, links pages and registers the entry. The caller
    /// guarantees the segment fits in an empty cache.
    fn place(
        &mut self,
        class: &str,
        attrs: BTreeSet<String>,
        pred: Dnf,
        tuple_count: usize,
        mut payloads: Vec<Vec<u8>>,
        now: u64,
    ) -> InsertOutcome {
        if payloads.is_empty() {
            payloads.push(Vec::new());
        }
        let n = payloads.len();
        self.evict_until(n);
        let ids = self.allocate_pages(n).expect("eviction freed enough pages");
        for (i, payload) in payloads.into_iter().enumerate() {
            self.pages[ids[i] as usize].write(payload, ids.get(i + 1).copied());
        }
        let id = SegmentId(self.next_id);
        self.next_id += 1;
        self.index.insert(
            id,
            SegmentIndexEntry {
                id,
                class: class.to_string(),
                attrs,
                pred,
                first_page: ids[0],
                timestamp: now,
                tuple_count,
                page_count: n,
            },
        );
        self.debug_check();
        InsertOutcome::Stored(id)
    }

    /// First pair of overlapping entries, if any.
    pub fn check_disjointness(&self) -> Option<(SegmentId, SegmentId)> {
        let entries: Vec<_> = self.index.values().collect();
        for (i, a) in entries.iter().enumerate() {
            for b in &entries[i + 1..] {
                if !disjoint(a, b) {
                    return Some((a.id, b.id));
                }
            }
        }
        None
    }

    /// Free pages plus chained pages cover every page exactly once.
    pub fn check_page_accounting(&self) -> bool {
        let mut seen = self.free.clone();
        for e in self.index.values() {
            let chain = self.chain(e);
            if chain.len() != e.page_count || !chain.into_iter().all(|p| seen.insert(p)) {
                return false;
            }
        }
        seen.len() == self.config.total_pages
            && self.pages.iter().all(|p| p.used() <= self.config.page_capacity_bytes)
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            if let Some((a, b)) = self.check_disjointness() {
                panic!("segments {a} and {b} overlap");
            }
            assert!(self.check_page_accounting(), "page accounting broken");
        }
    }

    #[cfg(test)]
    pub(crate) fn page_mut(&mut self, id: PageId) -> &mut Page {
        &mut self.pages[id as usize]
    }
}

fn project(t: &Tuple, attrs: &BTreeSet<String>) -> Result<Tuple> {
    attrs
        .iter()
        .map(|a| {
            t.get(a)
                .map(|v| (a.clone(), v.clone()))
                .ok_or_else(|| Error::MissingValue(a.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests;
