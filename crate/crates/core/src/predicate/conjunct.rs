use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Bound, CompareOp, ComparePredicate, Interval};
use crate::error::{Error, Result};
use crate::schema::ClassSchema;
use crate::value::Tuple;

/// A conjunction of compare predicates in normal form: one interval per
/// constrained attribute. The empty map is the unconstrained conjunct TRUE;
/// an unsatisfiable conjunction has no `Conjunct` value at all.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conjunct {
    ranges: BTreeMap<String, Interval>,
}

impl Conjunct {
    pub fn always() -> Self {
        Self::default()
    }

    /// Intersects the atoms' intervals per attribute; `None` when empty.
    /// Atoms are not type-checked here, see [`Conjunct::normalize`].
    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a ComparePredicate>) -> Option<Self> {
        let mut c = Conjunct::always();
        for atom in atoms {
            let iv = atom.op.interval(atom.constant.clone())?;
            c = c.constrain(&atom.attribute, &iv)?;
        }
        Some(c)
    }

    /// Type-checked normalization against a class schema.
    pub fn normalize(atoms: &[ComparePredicate], schema: &ClassSchema) -> Result<Option<Self>> {
        for atom in atoms {
            let expected = schema.kind_of(&atom.attribute)?;
            if atom.constant.kind() != expected {
                return Err(Error::KindMismatch {
                    attribute: atom.attribute.clone(),
                    expected: expected.name(),
                    found: atom.constant.kind().name(),
                });
            }
        }
        Ok(Self::from_atoms(atoms))
    }

    pub fn from_ranges(ranges: impl IntoIterator<Item = (String, Interval)>) -> Self {
        Self {
            ranges: ranges.into_iter().filter(|(_, iv)| !iv.is_full()).collect(),
        }
    }

    pub fn ranges(&self) -> &BTreeMap<String, Interval> {
        &self.ranges
    }

    pub fn range(&self, attr: &str) -> Option<&Interval> {
        self.ranges.get(attr)
    }

    pub fn is_always(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn constrain(mut self, attr: &str, iv: &Interval) -> Option<Self> {
        let merged = match self.ranges.get(attr) {
            Some(existing) => existing.intersect(iv)?,
            None => iv.clone(),
        };
        if merged.is_full() {
            self.ranges.remove(attr);
        } else {
            self.ranges.insert(attr.to_string(), merged);
        }
        Some(self)
    }

    pub fn intersect(&self, other: &Conjunct) -> Option<Conjunct> {
        let (small, large) = if self.ranges.len() <= other.ranges.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .ranges
            .iter()
            .try_fold(large.clone(), |acc, (attr, iv)| acc.constrain(attr, iv))
    }

    /// Every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Conjunct) -> bool {
        other.ranges.iter().all(|(attr, outer)| match self.ranges.get(attr) {
            Some(inner) => inner.is_subset_of(outer),
            None => false,
        })
    }

    /// De Morgan: one disjunct per complement piece of each attribute's range.
    pub fn negate(&self) -> Vec<Conjunct> {
        self.ranges
            .iter()
            .flat_map(|(attr, iv)| {
                iv.complement().into_iter().map(move |piece| Conjunct::from_ranges([(attr.clone(), piece)]))
            })
            .collect()
    }

    /// The union of two conjuncts when it is itself a conjunct: identical
    /// constraints except on at most one attribute, whose ranges touch.
    pub fn merge(&self, other: &Conjunct) -> Option<Conjunct> {
        if self.ranges.len() != other.ranges.len() || !self.ranges.keys().eq(other.ranges.keys()) {
            return None;
        }
        let mut differing = self
            .ranges
            .iter()
            .zip(other.ranges.values())
            .filter(|((_, a), b)| a != b);
        let ((attr, a), b) = differing.next()?;
        if differing.next().is_some() || !a.touches(b) {
            return None;
        }
        let mut merged = self.clone();
        let hull = a.hull(b);
        if hull.is_full() {
            merged.ranges.remove(attr);
        } else {
            merged.ranges.insert(attr.clone(), hull);
        }
        Some(merged)
    }

    /// Per-attribute hull; attributes unconstrained on either side drop out.
    pub fn hull(&self, other: &Conjunct) -> Conjunct {
        Conjunct::from_ranges(
            self.ranges
                .iter()
                .filter_map(|(attr, a)| other.ranges.get(attr).map(|b| (attr.clone(), a.hull(b)))),
        )
    }

    pub fn attrs(&self) -> impl Iterator<Item = &String> {
        self.ranges.keys()
    }

    pub fn restrict(&self, attrs: &BTreeSet<String>) -> Conjunct {
        Conjunct {
            ranges: self
                .ranges
                .iter()
                .filter(|(a, _)| attrs.contains(*a))
                .map(|(a, iv)| (a.clone(), iv.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, tuple: &Tuple) -> Result<bool> {
        for (attr, iv) in &self.ranges {
            let v = tuple.get(attr).ok_or_else(|| Error::MissingValue(attr.clone()))?;
            if !iv.contains(v) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Compare atoms equivalent to this conjunct.
    pub fn atoms(&self) -> Vec<ComparePredicate> {
        let mut out = Vec::new();
        for (attr, iv) in &self.ranges {
            if let Some(v) = iv.as_point() {
                out.push(ComparePredicate::new(attr.clone(), CompareOp::Eq, v.clone()));
                continue;
            }
            match iv.lower() {
                Bound::Unbounded => {}
                Bound::Inclusive(v) => out.push(ComparePredicate::new(attr.clone(), CompareOp::Ge, v.clone())),
                Bound::Exclusive(v) => out.push(ComparePredicate::new(attr.clone(), CompareOp::Gt, v.clone())),
            }
            match iv.upper() {
                Bound::Unbounded => {}
                Bound::Inclusive(v) => out.push(ComparePredicate::new(attr.clone(), CompareOp::Le, v.clone())),
                Bound::Exclusive(v) => out.push(ComparePredicate::new(attr.clone(), CompareOp::Lt, v.clone())),
            }
        }
        out
    }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_always() {
            return f.write_str("TRUE");
        }
        let atoms: Vec<String> = self.atoms().iter().map(ToString::to_string).collect();
        f.write_str(&atoms.join(" AND "))
    }
}
