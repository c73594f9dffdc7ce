use std::collections::BTreeSet;
use std::fmt;

use super::{Blowup, Conjunct};
use crate::error::Result;
use crate::value::Tuple;

/// A disjunction of satisfiable conjuncts.
///
/// No disjuncts is FALSE; a single unconstrained conjunct is TRUE. The
/// disjunct list is kept simplified and sorted, so structural equality is
/// equality up to reordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dnf {
    disjuncts: Vec<Conjunct>,
}

impl Default for Dnf {
    fn default() -> Self {
        Dnf::always()
    }
}

/// Drops subsumed disjuncts and merges adjacent boxes until nothing changes.
fn simplify(mut items: Vec<Conjunct>) -> Vec<Conjunct> {
    loop {
        items.sort();
        items.dedup();
        if items.iter().any(Conjunct::is_always) {
            return vec![Conjunct::always()];
        }
        let mut changed = false;

        let mut kept: Vec<Conjunct> = Vec::with_capacity(items.len());
        for (i, c) in items.iter().enumerate() {
            let subsumed = items
                .iter()
                .enumerate()
                .any(|(j, other)| i != j && c.is_subset_of(other));
            if subsumed {
                changed = true;
            } else {
                kept.push(c.clone());
            }
        }
        items = kept;

        'outer: for i in 0..items.len() {
            for j in i + 1..items.len() {
                if let Some(m) = items[i].merge(&items[j]) {
                    items.swap_remove(j);
                    items[i] = m;
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            return items;
        }
    }
}

impl Dnf {
    pub fn always() -> Self {
        Dnf {
            disjuncts: vec![Conjunct::always()],
        }
    }

    pub fn never() -> Self {
        Dnf { disjuncts: Vec::new() }
    }

    pub fn from_conjuncts(conjuncts: impl IntoIterator<Item = Conjunct>) -> Self {
        Dnf {
            disjuncts: simplify(conjuncts.into_iter().collect()),
        }
    }

    fn capped(conjuncts: Vec<Conjunct>, cap: usize) -> Result<Self, Blowup> {
        // guard the quadratic simplification against huge intermediate products
        if conjuncts.len() > cap.saturating_mul(4).max(16) {
            return Err(Blowup { cap });
        }
        let disjuncts = simplify(conjuncts);
        if disjuncts.len() > cap {
            return Err(Blowup { cap });
        }
        Ok(Dnf { disjuncts })
    }

    pub fn disjuncts(&self) -> &[Conjunct] {
        &self.disjuncts
    }

    pub fn is_true(&self) -> bool {
        self.disjuncts.len() == 1 && self.disjuncts[0].is_always()
    }

    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.is_false()
    }

    /// Whether `self ∧ other` is satisfiable, without building the product.
    pub fn intersects(&self, other: &Dnf) -> bool {
        self.disjuncts
            .iter()
            .any(|a| other.disjuncts.iter().any(|b| a.intersect(b).is_some()))
    }

    pub fn and(&self, other: &Dnf, cap: usize) -> Result<Dnf, Blowup> {
        if self.is_true() {
            return Ok(other.clone());
        }
        if other.is_true() {
            return Ok(self.clone());
        }
        let product: Vec<Conjunct> = self
            .disjuncts
            .iter()
            .flat_map(|a| other.disjuncts.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        Dnf::capped(product, cap)
    }

    pub fn or(&self, other: &Dnf, cap: usize) -> Result<Dnf, Blowup> {
        let all = self.disjuncts.iter().chain(&other.disjuncts).cloned().collect();
        Dnf::capped(all, cap)
    }

    pub fn negate(&self, cap: usize) -> Result<Dnf, Blowup> {
        self.disjuncts.iter().try_fold(Dnf::always(), |acc, d| {
            let negated = Dnf::capped(d.negate(), cap)?;
            acc.and(&negated, cap)
        })
    }

    /// Sound implication test: each disjunct of `self` must lie inside a single
    /// disjunct of `other`. Exact when `other` has one disjunct.
    pub fn implies(&self, other: &Dnf) -> bool {
        self.disjuncts
            .iter()
            .all(|d| other.disjuncts.iter().any(|e| d.is_subset_of(e)))
    }

    /// Attributes occurring in any atom.
    pub fn attrs(&self) -> BTreeSet<String> {
        self.disjuncts.iter().flat_map(|d| d.attrs().cloned()).collect()
    }

    /// Drops atoms over attributes outside `attrs`. The result is implied by
    /// `self`.
    pub fn restrict_to(&self, attrs: &BTreeSet<String>) -> Dnf {
        Dnf::from_conjuncts(self.disjuncts.iter().map(|d| d.restrict(attrs)))
    }

    /// The smallest single conjunct containing every disjunct.
    pub fn hull(&self) -> Dnf {
        let mut iter = self.disjuncts.iter();
        match iter.next() {
            None => Dnf::never(),
            Some(first) => Dnf {
                disjuncts: vec![iter.fold(first.clone(), |acc, d| acc.hull(d))],
            },
        }
    }

    pub fn eval(&self, tuple: &Tuple) -> Result<bool> {
        for d in &self.disjuncts {
            if d.eval(tuple)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_false() {
            return f.write_str("FALSE");
        }
        let parts: Vec<String> = self.disjuncts.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" OR "))
    }
}
