//! Fixed-size pages and the row framing used inside them.

use std::collections::BTreeSet;

use super::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::value::Tuple;

pub type PageId = u32;

/// One cache page. Rows are stored as `[u32 length][encoded row]` frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Page {
    id: PageId,
    payload: Vec<u8>,
    next: Option<PageId>,
    checksum: u32,
}

impl Page {
    pub(crate) fn blank(id: PageId) -> Self {
        Self {
            id,
            payload: Vec::new(),
            next: None,
            checksum: crc32fast::hash(&[]),
        }
    }

    pub(crate) fn restore(id: PageId, payload: Vec<u8>, next: Option<PageId>, checksum: u32) -> Self {
        Self { id, payload, next, checksum }
    }

    pub fn id(&self) -> PageId {
        self.id
    }

    /// Bytes in use; never exceeds the configured page capacity.
    pub fn used(&self) -> usize {
        self.payload.len()
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn next(&self) -> Option<PageId> {
        self.next
    }

    pub fn checksum(&self) -> u32 {
        self.checksum
    }

    pub fn verify(&self) -> bool {
        crc32fast::hash(&self.payload) == self.checksum
    }

    pub(crate) fn write(&mut self, payload: Vec<u8>, next: Option<PageId>) {
        self.checksum = crc32fast::hash(&payload);
        self.payload = payload;
        self.next = next;
    }

    pub(crate) fn clear(&mut self) {
        self.write(Vec::new(), None);
    }

    #[cfg(test)]
    pub(crate) fn corrupt(&mut self) {
        if let Some(b) = self.payload.first_mut() {
            *b ^= 0xff;
        } else {
            self.checksum ^= 1;
        }
    }

    pub(crate) fn rows(&self, attrs: &BTreeSet<String>) -> Result<Vec<Tuple>> {
        if !self.verify() {
            return Err(Error::Checksum { page: self.id });
        }
        let mut r = Reader::new(&self.payload);
        let mut out = Vec::new();
        while !r.is_empty() {
            out.push(decode_row(r.bytes()?, attrs)?);
        }
        Ok(out)
    }
}

/// Encodes the values of `attrs` (in set order) from `tuple`.
pub(crate) fn encode_row(tuple: &Tuple, attrs: &BTreeSet<String>) -> Result<Vec<u8>> {
    let mut w = Writer::default();
    for a in attrs {
        w.value(tuple.get(a).ok_or_else(|| Error::MissingValue(a.clone()))?);
    }
    Ok(w.buf)
}

fn decode_row(bytes: &[u8], attrs: &BTreeSet<String>) -> Result<Tuple> {
    let mut r = Reader::new(bytes);
    let mut t = Tuple::new();
    for a in attrs {
        t.insert(a.clone(), r.value()?);
    }
    if !r.is_empty() {
        return Err(Error::CorruptImage("trailing bytes in row".into()));
    }
    Ok(t)
}

/// Frame size of an encoded row.
pub(crate) fn frame_len(row: &[u8]) -> usize {
    row.len() + 4
}

/// Packs framed rows greedily into page payloads of at most `capacity` bytes.
/// Every row must fit in a page on its own.
pub(crate) fn pack(rows: &[Vec<u8>], capacity: usize) -> Vec<Vec<u8>> {
    let mut pages: Vec<Vec<u8>> = Vec::new();
    let mut cur = Writer::default();
    for row in rows {
        if cur.buf.len() + frame_len(row) > capacity {
            pages.push(std::mem::take(&mut cur.buf));
        }
        cur.bytes(row);
    }
    if !cur.buf.is_empty() {
        pages.push(cur.buf);
    }
    pages
}
