//! Finite unions of closed intervals on the time axis.

use crate::time::Time;

/// Sorted, disjoint closed intervals `[s, e]`. Touching intervals are merged;
/// degenerate `[s, s]` points are allowed.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IntervalSet {
    parts: Vec<(Time, Time)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn single(s: Time, e: Time) -> Self {
        IntervalSet::from_parts(vec![(s, e)])
    }

    /// Normalizes arbitrary closed intervals; pairs with `e < s` are dropped.
    pub fn from_parts(mut raw: Vec<(Time, Time)>) -> Self {
        raw.retain(|(s, e)| s <= e);
        raw.sort();
        let mut parts: Vec<(Time, Time)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match parts.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => parts.push((s, e)),
            }
        }
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[(Time, Time)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.parts.clone();
        raw.extend_from_slice(&other.parts);
        IntervalSet::from_parts(raw)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a0, a1) = self.parts[i];
            let (b0, b1) = other.parts[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_parts(out)
    }

    pub fn shift(&self, delta: Time) -> IntervalSet {
        IntervalSet {
            parts: self
                .parts
                .iter()
                .map(|&(s, e)| (s + delta, e + delta))
                .collect(),
        }
    }

    pub fn clip(&self, lo: Time, hi: Time) -> IntervalSet {
        self.intersect(&IntervalSet::single(lo, hi))
    }

    pub fn contains(&self, t: Time) -> bool {
        let i = self.parts.partition_point(|&(s, _)| s <= t);
        i > 0 && t <= self.parts[i - 1].1
    }

    /// True iff the set contains `[t, t + eps]` for some `eps > 0`.
    pub fn covers_right_of(&self, t: Time) -> bool {
        let i = self.parts.partition_point(|&(s, _)| s <= t);
        i > 0 && t < self.parts[i - 1].1
    }

    /// True iff `self` is a subset of `other`.
    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.parts.iter().all(|&(s, e)| {
            let i = other.parts.partition_point(|&(os, _)| os <= s);
            i > 0 && e <= other.parts[i - 1].1
        })
    }

    pub fn endpoints(&self) -> impl Iterator<Item = Time> + '_ {
        self.parts.iter().flat_map(|&(s, e)| [s, e])
    }
}
