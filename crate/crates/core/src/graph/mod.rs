//! Graph primitives and Markov-equivalence machinery.
//!
//! A [`Mec`] is stored as its skeleton plus its set of v-structures. Essential
//! graphs are only derived on demand (see [`essential_graph`]).

mod essential;
mod extension;
mod text;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodeset::{NodeSet, MAX_NODES};

pub use essential::{essential_graph, shd, EssentialGraph, PairStatus};
pub use extension::consistent_extension;
pub use text::{parse_graph_text, write_graph_text, MixedGraph};

fn check_node_count(p: usize) -> Result<()> {
    if p > MAX_NODES {
        Err(Error::TooManyNodes { p, max: MAX_NODES })
    } else {
        Ok(())
    }
}

/// Directed acyclic graph stored as per-node parent sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dag {
    parents: Vec<NodeSet>,
}

impl Dag {
    pub fn empty(p: usize) -> Self {
        assert!(p <= MAX_NODES, "node count {p} exceeds {MAX_NODES}");
        Dag {
            parents: vec![NodeSet::EMPTY; p],
        }
    }

    pub fn from_parents(parents: Vec<NodeSet>) -> Result<Self> {
        let p = parents.len();
        check_node_count(p)?;
        let all = NodeSet::full(p);
        for (i, pa) in parents.iter().enumerate() {
            if pa.contains(i) {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            if !pa.is_subset(all) {
                return Err(Error::InvalidGraph(format!("parent of {i} out of range")));
            }
            for j in pa.iter() {
                if parents[j].contains(i) {
                    return Err(Error::InvalidGraph(format!("arcs in both directions between {i} and {j}")));
                }
            }
        }
        if !is_acyclic(&parents) {
            return Err(Error::Cycle);
        }
        Ok(Dag { parents })
    }

    pub fn from_arcs(p: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        check_node_count(p)?;
        let mut parents = vec![NodeSet::EMPTY; p];
        for &(a, b) in arcs {
            if a >= p || b >= p {
                return Err(Error::InvalidGraph(format!("arc {a} -> {b} out of range for p = {p}")));
            }
            if parents[b].contains(a) || parents[a].contains(b) {
                return Err(Error::InvalidGraph(format!("duplicate pair {{{a}, {b}}}")));
            }
            parents[b].insert(a);
        }
        Dag::from_parents(parents)
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.parents.len()
    }

    #[inline]
    pub fn parents(&self, i: usize) -> NodeSet {
        self.parents[i]
    }

    pub fn parent_sets(&self) -> &[NodeSet] {
        &self.parents
    }

    pub fn children(&self, i: usize) -> NodeSet {
        (0..self.p()).filter(|&c| self.parents[c].contains(i)).collect()
    }

    #[inline]
    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(from)
    }

    #[inline]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_arc(a, b) || self.has_arc(b, a)
    }

    pub fn num_arcs(&self) -> usize {
        self.parents.iter().map(|s| s.len()).sum()
    }

    /// Arcs `(from, to)` sorted lexicographically.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(to, pa)| pa.iter().map(move |from| (from, to)))
            .collect();
        out.sort_unstable();
        out
    }

    /// The graph with `from -> to` replaced by `to -> from`.
    pub fn reverse_arc(&self, from: usize, to: usize) -> Result<Dag> {
        if !self.has_arc(from, to) {
            return Err(Error::ArcAbsent { from, to });
        }
        let mut parents = self.parents.clone();
        parents[to].remove(from);
        parents[from].insert(to);
        if !is_acyclic(&parents) {
            return Err(Error::Cycle);
        }
        Ok(Dag { parents })
    }

    pub fn add_arc(&self, from: usize, to: usize) -> Result<Dag> {
        if from == to {
            return Err(Error::InvalidGraph(format!("self-loop at node {from}")));
        }
        if self.adjacent(from, to) {
            return Err(Error::AlreadyAdjacent(from, to));
        }
        let mut parents = self.parents.clone();
        parents[to].insert(from);
        if !is_acyclic(&parents) {
            return Err(Error::Cycle);
        }
        Ok(Dag { parents })
    }

    pub fn remove_arc(&self, from: usize, to: usize) -> Result<Dag> {
        if !self.has_arc(from, to) {
            return Err(Error::ArcAbsent { from, to });
        }
        let mut parents = self.parents.clone();
        parents[to].remove(from);
        Ok(Dag { parents })
    }

    /// Orient every edge of `skeleton` from the lower to the higher index.
    pub fn low_to_high(skeleton: &UndirectedGraph) -> Dag {
        let parents = (0..skeleton.p())
            .map(|i| skeleton.neighbors(i).intersection(NodeSet::full(i)))
            .collect();
        Dag { parents }
    }
}

/// Kahn's algorithm over the parent-set representation; ties go to the
/// smallest index. Returns `None` on a cycle.
fn kahn(parents: &[NodeSet]) -> Option<Vec<usize>> {
    let p = parents.len();
    let mut placed = NodeSet::EMPTY;
    let mut order = Vec::with_capacity(p);
    while order.len() < p {
        let next = (0..p).find(|&i| !placed.contains(i) && parents[i].is_subset(placed))?;
        placed.insert(next);
        order.push(next);
    }
    Some(order)
}

/// True iff the directed graph given by per-node parent sets has no cycle.
pub fn is_acyclic(parents: &[NodeSet]) -> bool {
    kahn(parents).is_some()
}

/// Deterministic topological order: among available sources the smallest
/// index is emitted first.
pub fn topological_order(dag: &Dag) -> Vec<usize> {
    kahn(&dag.parents).expect("Dag invariant: acyclic")
}

/// Topological order of an arbitrary directed graph, or [`Error::Cycle`].
pub fn topological_order_of(parents: &[NodeSet]) -> Result<Vec<usize>> {
    kahn(parents).ok_or(Error::Cycle)
}

/// Simple undirected graph stored as symmetric neighbor sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UndirectedGraph {
    adj: Vec<NodeSet>,
}

impl UndirectedGraph {
    pub fn empty(p: usize) -> Self {
        assert!(p <= MAX_NODES, "node count {p} exceeds {MAX_NODES}");
        UndirectedGraph {
            adj: vec![NodeSet::EMPTY; p],
        }
    }

    pub fn complete(p: usize) -> Self {
        let all = NodeSet::full(p);
        UndirectedGraph {
            adj: (0..p).map(|i| all.without(i)).collect(),
        }
    }

    /// Path `0 - 1 - ... - (p-1)`.
    pub fn path(p: usize) -> Self {
        let mut g = UndirectedGraph::empty(p);
        for i in 1..p {
            g.add_edge(i - 1, i);
        }
        g
    }

    /// Cycle `0 - 1 - ... - (p-1) - 0`, for `p >= 3`.
    pub fn cycle(p: usize) -> Self {
        let mut g = UndirectedGraph::path(p);
        if p >= 3 {
            g.add_edge(p - 1, 0);
        }
        g
    }

    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_node_count(p)?;
        let mut g = UndirectedGraph::empty(p);
        for &(a, b) in edges {
            if a >= p || b >= p {
                return Err(Error::InvalidGraph(format!("edge {a} -- {b} out of range for p = {p}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if g.has_edge(a, b) {
                return Err(Error::InvalidGraph(format!("duplicate pair {{{a}, {b}}}")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn from_adjacency(adj: Vec<NodeSet>) -> Result<Self> {
        let p = adj.len();
        check_node_count(p)?;
        for (i, nb) in adj.iter().enumerate() {
            if nb.contains(i) || !nb.is_subset(NodeSet::full(p)) {
                return Err(Error::InvalidGraph(format!("bad neighborhood at node {i}")));
            }
            if nb.iter().any(|j| !adj[j].contains(i)) {
                return Err(Error::InvalidGraph(format!("asymmetric adjacency at node {i}")));
            }
        }
        Ok(UndirectedGraph { adj })
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> NodeSet {
        self.adj[i]
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert_ne!(a, b, "self-loop");
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a].remove(b);
        self.adj[b].remove(a);
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Edges `(a, b)` with `a < b`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.p() {
            for b in self.adj[a].iter().filter(|&b| b > a) {
                out.push((a, b));
            }
        }
        out
    }

    /// Connected components, each as a node set, ordered by smallest member.
    pub fn components(&self) -> Vec<NodeSet> {
        let mut seen = NodeSet::EMPTY;
        let mut out = Vec::new();
        for s in 0..self.p() {
            if seen.contains(s) {
                continue;
            }
            let mut comp = NodeSet::singleton(s);
            let mut frontier = comp;
            while let Some(v) = frontier.first() {
                frontier.remove(v);
                let fresh = self.adj[v].difference(comp);
                comp = comp.union(fresh);
                frontier = frontier.union(fresh);
            }
            seen = seen.union(comp);
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.p() <= 1 || self.components().len() == 1
    }

    pub fn is_forest(&self) -> bool {
        self.num_edges() + self.components().len() == self.p()
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.is_forest()
    }

    /// Connected and 2-regular.
    pub fn is_cycle(&self) -> bool {
        self.p() >= 3 && self.is_connected() && self.adj.iter().all(|s| s.len() == 2)
    }

    /// Induced subgraph on `nodes`, relabelled to `0..nodes.len()` in order.
    pub fn induced(&self, nodes: NodeSet) -> UndirectedGraph {
        let list = nodes.to_vec();
        let mut g = UndirectedGraph::empty(list.len());
        for (a, &u) in list.iter().enumerate() {
            for (b, &v) in list.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// Relabel node `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> UndirectedGraph {
        let mut g = UndirectedGraph::empty(self.p());
        for (a, b) in self.edges() {
            g.add_edge(perm[a], perm[b]);
        }
        g
    }
}

/// An induced collider `a -> collider <- b` with `a`, `b` non-adjacent.
/// Tails are stored in increasing order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VStructure {
    pub collider: usize,
    pub tails: (usize, usize),
}

impl VStructure {
    pub fn new(a: usize, collider: usize, b: usize) -> Self {
        let tails = if a < b { (a, b) } else { (b, a) };
        VStructure { collider, tails }
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::from_nodes([self.tails.0, self.collider, self.tails.1])
    }

    pub fn is_valid_in(&self, skeleton: &UndirectedGraph) -> bool {
        let (a, b) = self.tails;
        let c = self.collider;
        let p = skeleton.p();
        a != b
            && a != c
            && b != c
            && a < p
            && b < p
            && c < p
            && skeleton.has_edge(a, c)
            && skeleton.has_edge(b, c)
            && !skeleton.has_edge(a, b)
    }
}

/// Markov equivalence class stored as skeleton plus v-structures.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mec {
    skeleton: UndirectedGraph,
    vstructs: BTreeSet<VStructure>,
}

impl Mec {
    /// Validated construction: every v-structure must fit the skeleton and the
    /// pattern must admit a consistent DAG extension.
    pub fn new(skeleton: UndirectedGraph, vstructs: BTreeSet<VStructure>) -> Result<Self> {
        let m = Mec::pattern(skeleton, vstructs)?;
        if consistent_extension(&m).is_none() {
            return Err(Error::NotRealizable);
        }
        Ok(m)
    }

    /// A candidate pattern; v-structures are checked against the skeleton but
    /// realizability is not. Use [`consistent_extension`] to test it.
    pub fn pattern(skeleton: UndirectedGraph, vstructs: BTreeSet<VStructure>) -> Result<Self> {
        if let Some(bad) = vstructs.iter().find(|v| !v.is_valid_in(&skeleton)) {
            return Err(Error::InvalidGraph(format!("v-structure {bad:?} does not fit the skeleton")));
        }
        Ok(Mec { skeleton, vstructs })
    }

    pub(crate) fn from_parts_unchecked(skeleton: UndirectedGraph, vstructs: BTreeSet<VStructure>) -> Self {
        Mec { skeleton, vstructs }
    }

    /// The MEC with no edges.
    pub fn empty(p: usize) -> Self {
        Mec {
            skeleton: UndirectedGraph::empty(p),
            vstructs: BTreeSet::new(),
        }
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.skeleton.p()
    }

    pub fn skeleton(&self) -> &UndirectedGraph {
        &self.skeleton
    }

    pub fn vstructs(&self) -> &BTreeSet<VStructure> {
        &self.vstructs
    }
}

pub fn skeleton(dag: &Dag) -> UndirectedGraph {
    let p = dag.p();
    let mut adj = dag.parents.clone();
    for (i, pa) in dag.parents.iter().enumerate() {
        for j in pa.iter() {
            adj[j].insert(i);
        }
    }
    debug_assert_eq!(adj.len(), p);
    UndirectedGraph { adj }
}

pub fn v_structures(dag: &Dag) -> BTreeSet<VStructure> {
    let mut out = BTreeSet::new();
    for c in 0..dag.p() {
        let pa = dag.parents(c).to_vec();
        for (k, &a) in pa.iter().enumerate() {
            for &b in &pa[k + 1..] {
                if !dag.adjacent(a, b) {
                    out.insert(VStructure::new(a, c, b));
                }
            }
        }
    }
    out
}

pub fn mec_of(dag: &Dag) -> Mec {
    Mec {
        skeleton: skeleton(dag),
        vstructs: v_structures(dag),
    }
}

/// Same skeleton and same v-structures.
pub fn markov_equivalent(g: &Dag, h: &Dag) -> bool {
    g.p() == h.p() && skeleton(g) == skeleton(h) && v_structures(g) == v_structures(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(p: usize, arcs: &[(usize, usize)]) -> Dag {
        Dag::from_arcs(p, arcs).unwrap()
    }

    #[test]
    fn skeleton_examples() {
        // 1->2<-3 with labels shifted to 0-based
        assert_eq!(skeleton(&dag(3, &[(0, 1), (2, 1)])).edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(skeleton(&Dag::empty(3)).num_edges(), 0);
        assert_eq!(
            skeleton(&dag(3, &[(0, 1), (1, 2), (0, 2)])).edges(),
            vec![(0, 1), (0, 2), (1, 2)]
        );
    }

    #[test]
    fn v_structure_examples() {
        let vs = v_structures(&dag(3, &[(0, 1), (2, 1)]));
        assert_eq!(vs.into_iter().collect::<Vec<_>>(), vec![VStructure::new(0, 1, 2)]);
        assert!(v_structures(&dag(3, &[(0, 1), (2, 1), (0, 2)])).is_empty());
        assert!(v_structures(&dag(3, &[(0, 1), (1, 2)])).is_empty());
    }

    #[test]
    fn markov_equivalence_examples() {
        let chain = dag(3, &[(0, 1), (1, 2)]);
        let rev = dag(3, &[(1, 0), (2, 1)]);
        let coll = dag(3, &[(0, 1), (2, 1)]);
        assert!(markov_equivalent(&chain, &rev));
        assert!(!markov_equivalent(&coll, &chain));
        assert!(markov_equivalent(&coll, &coll));
    }

    #[test]
    fn mec_of_examples() {
        let m = mec_of(&dag(3, &[(0, 1), (2, 1)]));
        assert_eq!(m.skeleton(), &UndirectedGraph::path(3));
        assert_eq!(m.vstructs().len(), 1);
        assert!(mec_of(&dag(3, &[(0, 1), (1, 2)])).vstructs().is_empty());
        let complete = mec_of(&dag(3, &[(0, 1), (0, 2), (1, 2)]));
        assert_eq!(complete.skeleton(), &UndirectedGraph::complete(3));
        assert!(complete.vstructs().is_empty());
    }

    #[test]
    fn topological_order_examples() {
        assert_eq!(topological_order(&dag(3, &[(0, 1), (1, 2)])), vec![0, 1, 2]);
        assert_eq!(topological_order(&Dag::empty(4)), vec![0, 1, 2, 3]);
        let two_cycle = vec![NodeSet::singleton(1), NodeSet::singleton(0)];
        assert!(!is_acyclic(&two_cycle));
        assert!(matches!(topological_order_of(&two_cycle), Err(Error::Cycle)));
    }

    #[test]
    fn rejects_cycles_and_loops() {
        assert!(matches!(Dag::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]), Err(Error::Cycle)));
        assert!(Dag::from_arcs(2, &[(0, 0)]).is_err());
        assert!(Dag::from_arcs(2, &[(0, 1), (1, 0)]).is_err());
        assert!(UndirectedGraph::from_edges(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn graph_shapes() {
        assert!(UndirectedGraph::path(5).is_tree());
        assert!(UndirectedGraph::cycle(5).is_cycle());
        assert!(!UndirectedGraph::cycle(5).is_forest());
        assert_eq!(UndirectedGraph::complete(4).num_edges(), 6);
        let mut g = UndirectedGraph::empty(4);
        g.add_edge(0, 1);
        g.add_edge(2, 3);
        assert_eq!(g.components().len(), 2);
        assert!(g.is_forest() && !g.is_tree());
    }

    #[test]
    fn pattern_rejects_misfit_vstructure() {
        let skel = UndirectedGraph::path(3);
        let bad: BTreeSet<_> = [VStructure::new(0, 2, 1)].into_iter().collect();
        assert!(Mec::pattern(skel, bad).is_err());
    }
}
