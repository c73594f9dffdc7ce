use std::cmp::Ordering;

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Unbounded,
    Inclusive(Value),
    Exclusive(Value),
}

impl Bound {
    pub fn value(&self) -> Option<&Value> {
        match self {
            Bound::Unbounded => None,
            Bound::Inclusive(v) | Bound::Exclusive(v) => Some(v),
        }
    }
}

/// Orders lower bounds by how much they admit: smaller admits more.
fn cmp_lower(a: &Bound, b: &Bound) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Less,
        (_, Bound::Unbounded) => Ordering::Greater,
        (x, y) => {
            let ord = x.value().cmp(&y.value());
            ord.then_with(|| match (x, y) {
                (Bound::Inclusive(_), Bound::Exclusive(_)) => Ordering::Less,
                (Bound::Exclusive(_), Bound::Inclusive(_)) => Ordering::Greater,
                _ => Ordering::Equal,
            })
        }
    }
}

/// Orders upper bounds: larger admits more.
fn cmp_upper(a: &Bound, b: &Bound) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Greater,
        (_, Bound::Unbounded) => Ordering::Less,
        (x, y) => {
            let ord = x.value().cmp(&y.value());
            ord.then_with(|| match (x, y) {
                (Bound::Inclusive(_), Bound::Exclusive(_)) => Ordering::Greater,
                (Bound::Exclusive(_), Bound::Inclusive(_)) => Ordering::Less,
                _ => Ordering::Equal,
            })
        }
    }
}

/// A non-empty range of one attribute's values.
///
/// For discrete kinds (integer, date) bounds are always closed, so two
/// intervals denote the same set iff they are structurally equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    lower: Bound,
    upper: Bound,
}

impl Interval {
    pub fn full() -> Self {
        Self {
            lower: Bound::Unbounded,
            upper: Bound::Unbounded,
        }
    }

    pub fn point(v: Value) -> Self {
        Self {
            lower: Bound::Inclusive(v.clone()),
            upper: Bound::Inclusive(v),
        }
    }

    /// Builds a canonical interval, or `None` when it is empty.
    pub fn new(lower: Bound, upper: Bound) -> Option<Self> {
        let lower = match lower {
            Bound::Exclusive(v) if v.kind().is_discrete() => Bound::Inclusive(v.successor()?),
            b => b,
        };
        let upper = match upper {
            Bound::Exclusive(v) if v.kind().is_discrete() => Bound::Inclusive(v.predecessor()?),
            b => b,
        };
        if let (Some(lo), Some(hi)) = (lower.value(), upper.value()) {
            match lo.cmp(hi) {
                Ordering::Greater => return None,
                Ordering::Equal if !matches!((&lower, &upper), (Bound::Inclusive(_), Bound::Inclusive(_))) => {
                    return None
                }
                _ => {}
            }
        }
        Some(Self { lower, upper })
    }

    pub fn lower(&self) -> &Bound {
        &self.lower
    }

    pub fn upper(&self) -> &Bound {
        &self.upper
    }

    pub fn is_full(&self) -> bool {
        self.lower == Bound::Unbounded && self.upper == Bound::Unbounded
    }

    pub fn as_point(&self) -> Option<&Value> {
        match (&self.lower, &self.upper) {
            (Bound::Inclusive(a), Bound::Inclusive(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        let above = match &self.lower {
            Bound::Unbounded => true,
            Bound::Inclusive(lo) => v >= lo,
            Bound::Exclusive(lo) => v > lo,
        };
        let below = match &self.upper {
            Bound::Unbounded => true,
            Bound::Inclusive(hi) => v <= hi,
            Bound::Exclusive(hi) => v < hi,
        };
        above && below
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lower = std::cmp::max_by(&self.lower, &other.lower, |a, b| cmp_lower(a, b));
        let upper = std::cmp::min_by(&self.upper, &other.upper, |a, b| cmp_upper(a, b));
        Interval::new(lower.clone(), upper.clone())
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        cmp_lower(&other.lower, &self.lower) != Ordering::Greater
            && cmp_upper(&self.upper, &other.upper) != Ordering::Greater
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        let lower = std::cmp::min_by(&self.lower, &other.lower, |a, b| cmp_lower(a, b));
        let upper = std::cmp::max_by(&self.upper, &other.upper, |a, b| cmp_upper(a, b));
        Interval {
            lower: lower.clone(),
            upper: upper.clone(),
        }
    }

    /// True when the union of the two intervals is itself an interval.
    pub fn touches(&self, other: &Interval) -> bool {
        if self.intersect(other).is_some() {
            return true;
        }
        let (first, second) = if cmp_lower(&self.lower, &other.lower) != Ordering::Greater {
            (self, other)
        } else {
            (other, self)
        };
        match (&first.upper, &second.lower) {
            (Bound::Inclusive(u), Bound::Inclusive(l)) => u.successor().as_ref() == Some(l),
            (Bound::Inclusive(u), Bound::Exclusive(l)) | (Bound::Exclusive(u), Bound::Inclusive(l)) => u == l,
            _ => false,
        }
    }

    /// The values outside this interval, as up to two intervals.
    pub fn complement(&self) -> Vec<Interval> {
        let mut out = Vec::with_capacity(2);
        let below = match &self.lower {
            Bound::Unbounded => None,
            Bound::Inclusive(v) => Interval::new(Bound::Unbounded, Bound::Exclusive(v.clone())),
            Bound::Exclusive(v) => Interval::new(Bound::Unbounded, Bound::Inclusive(v.clone())),
        };
        let above = match &self.upper {
            Bound::Unbounded => None,
            Bound::Inclusive(v) => Interval::new(Bound::Exclusive(v.clone()), Bound::Unbounded),
            Bound::Exclusive(v) => Interval::new(Bound::Inclusive(v.clone()), Bound::Unbounded),
        };
        out.extend(below);
        out.extend(above);
        out
    }
}
