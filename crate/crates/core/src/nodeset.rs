//! Bitmask node sets.
//!
//! Nodes are 0-based indices below [`MAX_NODES`]. A set is a `u64` mask, so
//! the mask value itself is a canonical key for a subset of nodes.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Hard upper bound on the node count of any graph in this crate.
pub const MAX_NODES: usize = 64;

#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_NODES);
        NodeSet(1 << i)
    }

    /// `{0, 1, ..., p-1}`.
    pub fn full(p: usize) -> Self {
        if p >= 64 {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << p) - 1)
        }
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(nodes: I) -> Self {
        nodes.into_iter().fold(NodeSet::EMPTY, |s, i| s.with(i))
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < MAX_NODES && self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: usize) -> Self {
        NodeSet(self.0 | 1 << i)
    }

    #[inline]
    pub fn without(self, i: usize) -> Self {
        NodeSet(self.0 & !(1 << i))
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1 << i);
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Smallest element.
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn iter(self) -> NodeIter {
        NodeIter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset of `self`, in increasing mask order (the empty set first).
    pub fn submasks(self) -> SubmaskIter {
        SubmaskIter {
            full: self.0,
            next: Some(0),
        }
    }

    /// Subsets of `self` with at most `max_size` elements, ordered by size and
    /// then lexicographically on the sorted element lists.
    pub fn subsets_by_size(self, max_size: Option<usize>) -> Vec<NodeSet> {
        let elems = self.to_vec();
        let top = max_size.unwrap_or(elems.len()).min(elems.len());
        let mut out = Vec::new();
        for k in 0..=top {
            combinations(&elems, k, &mut |c| out.push(NodeSet::from_nodes(c.iter().copied())));
        }
        out
    }
}

fn combinations(elems: &[usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    let n = elems.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<usize> = Vec::with_capacity(k);
    loop {
        buf.clear();
        buf.extend(idx.iter().map(|&i| elems[i]));
        f(&buf);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for q in i..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

pub struct NodeIter(u64);

impl Iterator for NodeIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

pub struct SubmaskIter {
    full: u64,
    next: Option<u64>,
}

impl Iterator for SubmaskIter {
    type Item = NodeSet;

    fn next(&mut self) -> Option<NodeSet> {
        let cur = self.next?;
        // next submask in increasing order: (cur - full) & full
        let nxt = cur.wrapping_sub(self.full) & self.full;
        self.next = if nxt == 0 { None } else { Some(nxt) };
        Some(NodeSet(cur))
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSet::from_nodes(iter)
    }
}

impl IntoIterator for NodeSet {
    type Item = usize;
    type IntoIter = NodeIter;

    fn into_iter(self) -> NodeIter {
        self.iter()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = v.iter().find(|&&i| i >= MAX_NODES) {
            return Err(serde::de::Error::custom(format!("node index {bad} out of range")));
        }
        Ok(NodeSet::from_nodes(v))
    }
}
