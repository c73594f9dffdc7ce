//! Binary cache image: `SEMC`, version, config, caller state, index, pages,
//! then a CRC-32 of everything before it.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::codec::{Reader, Writer};
use super::{CacheConfig, Page, PageId, SegmentId, SegmentIndexEntry, SemanticCache};
use crate::error::{Error, Result};
use crate::schema::Catalog;

const MAGIC: &[u8; 4] = b"SEMC";
const VERSION: u8 = 1;
const NO_PAGE: u32 = u32::MAX;

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptImage(msg.into())
}

impl SemanticCache {
    /// Serializes the cache. `extra` is opaque caller state stored alongside.
    pub fn dump(&self, extra: &[u8]) -> Vec<u8> {
        let mut w = Writer::default();
        w.buf.extend_from_slice(MAGIC);
        w.u8(VERSION);
        w.u32(self.config.page_capacity_bytes as u32);
        w.u32(self.config.total_pages as u32);
        w.u32(self.config.blowup_cap as u32);
        w.u64(self.next_id);
        w.u64(self.evictions);
        w.bytes(extra);

        w.u32(self.index.len() as u32);
        for e in self.index.values() {
            w.u64(e.id.0);
            w.str(&e.class);
            w.u32(e.attrs.len() as u32);
            e.attrs.iter().for_each(|a| w.str(a));
            w.dnf(&e.pred);
            w.u32(e.first_page);
            w.u64(e.timestamp);
            w.u64(e.tuple_count as u64);
            w.u32(e.page_count as u32);
        }

        for p in &self.pages {
            w.u32(p.next().unwrap_or(NO_PAGE));
            w.u32(p.checksum());
            w.bytes(p.payload());
        }
        let crc = crc32fast::hash(&w.buf);
        w.u32(crc);
        w.buf
    }

    /// Restores a cache image, returning the cache and the caller state.
    pub fn load(bytes: &[u8], catalog: Arc<Catalog>) -> Result<(Self, Vec<u8>)> {
        if bytes.len() < MAGIC.len() + 5 || &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().expect("4 bytes")) {
            return Err(corrupt("image checksum mismatch"));
        }
        let mut r = Reader::new(&body[4..]);
        if r.u8()? != VERSION {
            return Err(corrupt("unsupported version"));
        }
        let config = CacheConfig {
            page_capacity_bytes: r.u32()? as usize,
            total_pages: r.u32()? as usize,
            blowup_cap: r.u32()? as usize,
        };
        config.validate()?;
        let next_id = r.u64()?;
        let evictions = r.u64()?;
        let extra = r.bytes()?.to_vec();

        let mut index = BTreeMap::new();
        for _ in 0..r.u32()? {
            let id = SegmentId(r.u64()?);
            let class = r.str()?;
            catalog.class(&class).map_err(|_| corrupt(format!("unknown class `{class}`")))?;
            let attrs = (0..r.u32()?).map(|_| r.str()).collect::<Result<BTreeSet<_>>>()?;
            let entry = SegmentIndexEntry {
                id,
                class,
                attrs,
                pred: r.dnf()?,
                first_page: r.u32()?,
                timestamp: r.u64()?,
                tuple_count: r.u64()? as usize,
                page_count: r.u32()? as usize,
            };
            if id.0 >= next_id || index.insert(id, entry).is_some() {
                return Err(corrupt(format!("bad segment id {id}")));
            }
        }

        let mut pages = Vec::with_capacity(config.total_pages);
        for i in 0..config.total_pages {
            let next = match r.u32()? {
                NO_PAGE => None,
                n if (n as usize) < config.total_pages => Some(n),
                _ => return Err(corrupt("page link out of range")),
            };
            let checksum = r.u32()?;
            let payload = r.bytes()?.to_vec();
            if payload.len() > config.page_capacity_bytes {
                return Err(corrupt("page payload exceeds capacity"));
            }
            let page = Page::restore(i as PageId, payload, next, checksum);
            if !page.verify() {
                return Err(Error::Checksum { page: i as PageId });
            }
            pages.push(page);
        }
        if !r.is_empty() {
            return Err(corrupt("trailing bytes"));
        }

        let mut cache = SemanticCache {
            catalog,
            config,
            pages,
            free: BTreeSet::new(),
            index,
            next_id,
            evictions,
        };
        let mut used = BTreeSet::new();
        for e in cache.index.values() {
            if e.first_page as usize >= config.total_pages {
                return Err(corrupt("first page out of range"));
            }
            let chain = cache.chain(e);
            if chain.len() != e.page_count || !chain.into_iter().all(|p| used.insert(p)) {
                return Err(corrupt(format!("broken page chain for {}", e.id)));
            }
        }
        cache.free = (0..config.total_pages as PageId).filter(|p| !used.contains(p)).collect();
        if cache.check_disjointness().is_some() {
            return Err(corrupt("overlapping segments"));
        }
        Ok((cache, extra))
    }
}
