//! Little-endian binary encoding for rows, predicates and cache images.

use crate::error::{Error, Result};
use crate::predicate::{Bound, Conjunct, Dnf, Interval};
use crate::value::Value;

#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.buf.extend_from_slice(b);
    }

    pub fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }

    pub fn value(&mut self, v: &Value) {
        match v {
            Value::Integer(i) => {
                self.u8(0);
                self.buf.extend_from_slice(&i.to_le_bytes());
            }
            Value::Decimal(d) => {
                self.u8(1);
                self.u64(d.into_inner().to_bits());
            }
            Value::Text(s) => {
                self.u8(2);
                self.str(s);
            }
            Value::Date(d) => {
                self.u8(3);
                self.buf.extend_from_slice(&Value::date_days(d).to_le_bytes());
            }
        }
    }

    fn bound(&mut self, b: &Bound) {
        match b {
            Bound::Unbounded => self.u8(0),
            Bound::Inclusive(v) => {
                self.u8(1);
                self.value(v);
            }
            Bound::Exclusive(v) => {
                self.u8(2);
                self.value(v);
            }
        }
    }

    pub fn dnf(&mut self, p: &Dnf) {
        self.u32(p.disjuncts().len() as u32);
        for c in p.disjuncts() {
            self.u32(c.ranges().len() as u32);
            for (attr, iv) in c.ranges() {
                self.str(attr);
                self.bound(iv.lower());
                self.bound(iv.upper());
            }
        }
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(what: &str) -> Error {
    Error::CorruptImage(what.to_string())
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| corrupt("truncated"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn str(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| corrupt("invalid utf-8"))
    }

    pub fn value(&mut self) -> Result<Value> {
        Ok(match self.u8()? {
            0 => Value::Integer(i64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"))),
            1 => Value::decimal(f64::from_bits(self.u64()?)),
            2 => Value::Text(self.str()?),
            3 => {
                let days = i32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes"));
                Value::Date(Value::date_from_days(days).ok_or_else(|| corrupt("date out of range"))?)
            }
            _ => return Err(corrupt("unknown value tag")),
        })
    }

    fn bound(&mut self) -> Result<Bound> {
        Ok(match self.u8()? {
            0 => Bound::Unbounded,
            1 => Bound::Inclusive(self.value()?),
            2 => Bound::Exclusive(self.value()?),
            _ => return Err(corrupt("unknown bound tag")),
        })
    }

    pub fn dnf(&mut self) -> Result<Dnf> {
        let n = self.u32()?;
        let mut conjuncts = Vec::new();
        for _ in 0..n {
            let m = self.u32()?;
            let mut ranges = Vec::new();
            for _ in 0..m {
                let attr = self.str()?;
                let iv = Interval::new(self.bound()?, self.bound()?).ok_or_else(|| corrupt("empty interval"))?;
                ranges.push((attr, iv));
            }
            conjuncts.push(Conjunct::from_ranges(ranges));
        }
        Ok(Dnf::from_conjuncts(conjuncts))
    }
}
