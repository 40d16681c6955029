//! Characteristic imsets.
//!
//! `c(S) = 1` iff some `i ∈ S` has every other member of `S` as a parent.
//! Imsets are stored sparsely as the set of coordinates equal to one.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{consistent_extension, Dag, Mec, UndirectedGraph, VStructure};
use crate::nodeset::NodeSet;

/// Largest node count for which [`full_imset`] materializes all coordinates.
pub const FULL_IMSET_MAX_NODES: usize = 16;

/// A node subset of size at least two.
///
/// Ordered by size, then lexicographically on the sorted member list.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct SubsetKey(NodeSet);

impl SubsetKey {
    pub fn new(s: NodeSet) -> Result<Self> {
        if s.len() < 2 {
            Err(Error::SubsetTooSmall)
        } else {
            Ok(SubsetKey(s))
        }
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(nodes: I) -> Result<Self> {
        SubsetKey::new(NodeSet::from_nodes(nodes))
    }

    #[inline]
    pub fn set(self) -> NodeSet {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.len()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.0.to_vec()
    }
}

impl Ord for SubsetKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for SubsetKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SubsetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Serialize for SubsetKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubsetKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = NodeSet::deserialize(d)?;
        SubsetKey::new(s).map_err(serde::de::Error::custom)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImsetMode {
    /// Only coordinates with `|S| ∈ {2, 3}`.
    Restricted,
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharImset {
    p: usize,
    mode: ImsetMode,
    ones: BTreeSet<SubsetKey>,
}

impl CharImset {
    /// Build from explicit coordinates. Restricted mode rejects keys of size > 3.
    pub fn from_ones(p: usize, mode: ImsetMode, ones: BTreeSet<SubsetKey>) -> Result<Self> {
        let all = NodeSet::full(p);
        for k in &ones {
            if !k.set().is_subset(all) {
                return Err(Error::InconsistentImset(format!("{k:?} out of range for p = {p}")));
            }
            if mode == ImsetMode::Restricted && k.len() > 3 {
                return Err(Error::InconsistentImset(format!("{k:?} too large for restricted mode")));
            }
        }
        Ok(CharImset { p, mode, ones })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mode(&self) -> ImsetMode {
        self.mode
    }

    pub fn ones(&self) -> &BTreeSet<SubsetKey> {
        &self.ones
    }

    pub fn get(&self, s: SubsetKey) -> bool {
        self.ones.contains(&s)
    }

    /// Dense 0/1 vector over the given coordinate list.
    pub fn to_dense(&self, coords: &[SubsetKey]) -> Vec<u8> {
        coords.iter().map(|k| self.ones.contains(k) as u8).collect()
    }

    /// Keep only coordinates of size 2 and 3.
    pub fn restrict(&self) -> CharImset {
        CharImset {
            p: self.p,
            mode: ImsetMode::Restricted,
            ones: self.ones.iter().copied().filter(|k| k.len() <= 3).collect(),
        }
    }

    pub fn to_json(&self) -> ImsetJson {
        ImsetJson {
            p: self.p,
            ones: self.ones.iter().map(|k| k.to_vec()).collect(),
        }
    }

    pub fn from_json(j: &ImsetJson, mode: ImsetMode) -> Result<Self> {
        let ones = j
            .ones
            .iter()
            .map(|v| SubsetKey::from_nodes(v.iter().copied()))
            .collect::<Result<BTreeSet<_>>>()?;
        CharImset::from_ones(j.p, mode, ones)
    }
}

/// Serialized imset: `{"p": n, "ones": [[...sorted indices...], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImsetJson {
    pub p: usize,
    pub ones: Vec<Vec<usize>>,
}

/// All coordinates `S ⊆ [p]`, `|S| ≥ 2`, in canonical order.
pub fn all_coordinates(p: usize) -> Vec<SubsetKey> {
    let mut v: Vec<SubsetKey> = NodeSet::full(p)
        .submasks()
        .filter(|s| s.len() >= 2)
        .map(SubsetKey)
        .collect();
    v.sort();
    v
}

#[inline]
pub(crate) fn entry_raw(dag: &Dag, s: NodeSet) -> bool {
    s.iter().any(|i| s.without(i).is_subset(dag.parents(i)))
}

pub fn imset_entry(dag: &Dag, s: SubsetKey) -> Result<bool> {
    if !s.set().is_subset(NodeSet::full(dag.p())) {
        return Err(Error::InvalidArgument(format!("{s:?} out of range for p = {}", dag.p())));
    }
    Ok(entry_raw(dag, s.set()))
}

pub fn restricted_imset(dag: &Dag) -> CharImset {
    let mut ones = BTreeSet::new();
    for i in 0..dag.p() {
        let pa = dag.parents(i).to_vec();
        for (k, &a) in pa.iter().enumerate() {
            ones.insert(SubsetKey(NodeSet::from_nodes([a, i])));
            for &b in &pa[k + 1..] {
                ones.insert(SubsetKey(NodeSet::from_nodes([a, b, i])));
            }
        }
    }
    CharImset {
        p: dag.p(),
        mode: ImsetMode::Restricted,
        ones,
    }
}

/// The sparse full imset: `{T ∪ {i} : T ⊆ pa(i), T ≠ ∅}` over all nodes.
pub(crate) fn full_ones(dag: &Dag) -> BTreeSet<SubsetKey> {
    let mut ones = BTreeSet::new();
    for i in 0..dag.p() {
        for t in dag.parents(i).submasks().skip(1) {
            ones.insert(SubsetKey(t.with(i)));
        }
    }
    ones
}

pub fn full_imset(dag: &Dag) -> Result<CharImset> {
    if dag.p() > FULL_IMSET_MAX_NODES {
        return Err(Error::TooManyNodes {
            p: dag.p(),
            max: FULL_IMSET_MAX_NODES,
        });
    }
    Ok(CharImset {
        p: dag.p(),
        mode: ImsetMode::Full,
        ones: full_ones(dag),
    })
}

/// Recover (skeleton, v-structures) from the 2- and 3-set coordinates.
///
/// Fails when some 3-set is one while spanning fewer than two skeleton edges,
/// or when a skeleton triangle has a zero 3-set (no DAG produces either).
/// The result is a pattern; its realizability is not checked here.
pub fn recover_mec(imset: &CharImset) -> Result<Mec> {
    let p = imset.p;
    let mut skel = UndirectedGraph::empty(p);
    for k in imset.ones.iter().filter(|k| k.len() == 2) {
        let v = k.to_vec();
        skel.add_edge(v[0], v[1]);
    }
    let mut vstructs = BTreeSet::new();
    let mut triangles_seen = BTreeSet::new();
    for k in imset.ones.iter().filter(|k| k.len() == 3) {
        let v = k.to_vec();
        let (a, b, c) = (v[0], v[1], v[2]);
        let ab = skel.has_edge(a, b);
        let ac = skel.has_edge(a, c);
        let bc = skel.has_edge(b, c);
        match (ab, ac, bc) {
            (true, true, true) => {
                triangles_seen.insert(*k);
            }
            (true, true, false) => {
                vstructs.insert(VStructure::new(b, a, c));
            }
            (true, false, true) => {
                vstructs.insert(VStructure::new(a, b, c));
            }
            (false, true, true) => {
                vstructs.insert(VStructure::new(a, c, b));
            }
            _ => {
                return Err(Error::InconsistentImset(format!(
                    "3-set {v:?} is one but spans fewer than two edges"
                )))
            }
        }
    }
    for a in 0..p {
        for b in skel.neighbors(a).iter().filter(|&b| b > a) {
            for c in skel.neighbors(a).intersection(skel.neighbors(b)).iter().filter(|&c| c > b) {
                let key = SubsetKey(NodeSet::from_nodes([a, b, c]));
                if !triangles_seen.contains(&key) {
                    return Err(Error::InconsistentImset(format!("triangle {:?} has a zero 3-set", key)));
                }
            }
        }
    }
    Ok(Mec::from_parts_unchecked(skel, vstructs))
}

/// Recover and additionally require a DAG extension.
pub fn recover_realizable(imset: &CharImset) -> Result<(Mec, Dag)> {
    let m = recover_mec(imset)?;
    let d = consistent_extension(&m).ok_or(Error::NotRealizable)?;
    Ok((m, d))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImsetDelta {
    pub added: BTreeSet<SubsetKey>,
    pub removed: BTreeSet<SubsetKey>,
}

impl ImsetDelta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    pub fn inverse(&self) -> ImsetDelta {
        ImsetDelta {
            added: self.removed.clone(),
            removed: self.added.clone(),
        }
    }

    /// Only coordinates of size 2 and 3.
    pub fn restricted(&self) -> ImsetDelta {
        ImsetDelta {
            added: self.added.iter().copied().filter(|k| k.len() <= 3).collect(),
            removed: self.removed.iter().copied().filter(|k| k.len() <= 3).collect(),
        }
    }

    pub(crate) fn between(a: &BTreeSet<SubsetKey>, b: &BTreeSet<SubsetKey>) -> ImsetDelta {
        ImsetDelta {
            added: b.difference(a).copied().collect(),
            removed: a.difference(b).copied().collect(),
        }
    }

    /// Apply to a set of ones; `None` if the result would leave the 0/1 range.
    pub(crate) fn apply_to(&self, ones: &BTreeSet<SubsetKey>) -> Option<BTreeSet<SubsetKey>> {
        let mut out = ones.clone();
        for k in &self.removed {
            if !out.remove(k) {
                return None;
            }
        }
        for k in &self.added {
            if !out.insert(*k) {
                return None;
            }
        }
        Some(out)
    }
}

/// `b - a`, split into coordinates that rise to one and fall to zero.
pub fn imset_delta(a: &CharImset, b: &CharImset) -> Result<ImsetDelta> {
    if a.p != b.p || a.mode != b.mode {
        return Err(Error::ModeMismatch);
    }
    Ok(ImsetDelta::between(&a.ones, &b.ones))
}
