//! Turn pairs, edge pairs, shifts and splits between MECs.
//!
//! Every pair is unordered. An enumerator reports each neighbor of the source
//! MEC once, with the move's delta signed from source to target.

use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{consistent_extension, mec_of, Dag, Mec, UndirectedGraph};
use crate::imset::{entry_raw, full_ones, recover_mec, CharImset, ImsetDelta, ImsetMode, SubsetKey};
use crate::nodeset::NodeSet;

/// Above this node count the default subset cap is [`DEFAULT_LARGE_CAP`].
pub const UNCAPPED_MAX_NODES: usize = 12;
pub const DEFAULT_LARGE_CAP: usize = 8;

pub fn default_cap(p: usize) -> Option<usize> {
    if p <= UNCAPPED_MAX_NODES {
        None
    } else {
        Some(DEFAULT_LARGE_CAP)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MoveKind {
    VStructureAddition,
    Budding,
    Flip,
    EdgePair,
    Shift,
    Split,
}

impl MoveKind {
    pub fn is_turn(self) -> bool {
        matches!(self, MoveKind::VStructureAddition | MoveKind::Budding | MoveKind::Flip)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum MoveParams {
    Triple {
        set: SubsetKey,
    },
    /// Budding and edge pair: `(i, j, S*)`.
    Pivot {
        i: usize,
        j: usize,
        s_star: NodeSet,
    },
    Flip {
        i: usize,
        j: usize,
        s_i: NodeSet,
        s_j: NodeSet,
    },
    Path {
        path: Vec<usize>,
    },
}

/// A move together with its exact imset change from the source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Move {
    pub kind: MoveKind,
    pub params: MoveParams,
    pub delta: ImsetDelta,
}

impl Move {
    /// The same pair walked from the other endpoint.
    pub fn inverse(&self) -> Move {
        Move {
            kind: self.kind,
            params: self.params.clone(),
            delta: self.delta.inverse(),
        }
    }

    /// Whether the move adds a skeleton edge, removes one, or keeps it.
    pub fn edge_change(&self) -> i32 {
        let two = |s: &BTreeSet<SubsetKey>| s.iter().any(|k| k.len() == 2);
        two(&self.delta.added) as i32 - two(&self.delta.removed) as i32
    }
}

fn fam(i: usize, j: usize, base: NodeSet, keep: impl Fn(NodeSet) -> bool) -> BTreeSet<SubsetKey> {
    base.submasks()
        .filter(|&t| keep(t))
        .map(|t| SubsetKey::new(t.with(i).with(j)).expect("contains i and j"))
        .collect()
}

/// `{T ∪ {i,j} : T ⊆ s, T ⊄ ne}`.
fn bud_family(i: usize, j: usize, s: NodeSet, ne: NodeSet) -> BTreeSet<SubsetKey> {
    fam(i, j, s, |t| !t.is_subset(ne))
}

/// `{S ∪ {i,j} : S ⊆ s}`.
fn edge_family(i: usize, j: usize, s: NodeSet) -> BTreeSet<SubsetKey> {
    fam(i, j, s, |_| true)
}

pub fn budding_move(i: usize, j: usize, s_star: NodeSet, skel: &UndirectedGraph) -> Move {
    Move {
        kind: if s_star.len() == 1 {
            MoveKind::VStructureAddition
        } else {
            MoveKind::Budding
        },
        params: if s_star.len() == 1 {
            MoveParams::Triple {
                set: SubsetKey::new(s_star.with(i).with(j)).expect("three nodes"),
            }
        } else {
            MoveParams::Pivot { i, j, s_star }
        },
        delta: ImsetDelta {
            added: bud_family(i, j, s_star, skel.neighbors(j)),
            removed: BTreeSet::new(),
        },
    }
}

pub fn flip_move(i: usize, j: usize, s_i: NodeSet, s_j: NodeSet, skel: &UndirectedGraph) -> Move {
    Move {
        kind: MoveKind::Flip,
        params: MoveParams::Flip { i, j, s_i, s_j },
        delta: ImsetDelta {
            added: bud_family(i, j, s_i, skel.neighbors(j)),
            removed: bud_family(j, i, s_j, skel.neighbors(i)),
        },
    }
}

pub fn edge_pair_move(i: usize, j: usize, s_star: NodeSet) -> Move {
    Move {
        kind: MoveKind::EdgePair,
        params: MoveParams::Pivot { i, j, s_star },
        delta: ImsetDelta {
            added: edge_family(i, j, s_star),
            removed: BTreeSet::new(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TurnOutcome {
    MarkovEquivalent,
    Move(Move),
}

/// Classify the reversal of `i -> j`.
pub fn turn_edge_delta(dag: &Dag, i: usize, j: usize) -> Result<TurnOutcome> {
    if !dag.has_arc(i, j) {
        return Err(Error::ArcAbsent { from: i, to: j });
    }
    dag.reverse_arc(i, j)?;
    let pa_i = dag.parents(i);
    let pa_j = dag.parents(j).without(i);
    let skel = crate::graph::skeleton(dag);
    if pa_i == pa_j {
        return Ok(TurnOutcome::MarkovEquivalent);
    }
    let plus = edge_family(i, j, pa_i);
    let minus = edge_family(i, j, pa_j);
    let added: BTreeSet<SubsetKey> = plus.difference(&minus).copied().collect();
    let removed: BTreeSet<SubsetKey> = minus.difference(&plus).copied().collect();
    let mv = if pa_j.is_subset(pa_i) {
        budding_move(i, j, pa_i, &skel)
    } else if pa_i.is_subset(pa_j) {
        budding_move(j, i, pa_j, &skel).inverse()
    } else {
        flip_move(i, j, pa_i, pa_j, &skel)
    };
    debug_assert_eq!(mv.delta, ImsetDelta { added, removed });
    Ok(TurnOutcome::Move(mv))
}

/// The edge pair obtained by adding `j -> i`.
pub fn add_edge_delta(dag: &Dag, j: usize, i: usize) -> Result<Move> {
    dag.add_arc(j, i)?;
    Ok(edge_pair_move(i, j, dag.parents(i)))
}

/// 2- and 3-set ones of a MEC: edges, v-structures and triangles.
pub(crate) fn mec_restricted_ones(mec: &Mec) -> BTreeSet<SubsetKey> {
    let skel = mec.skeleton();
    let mut ones = BTreeSet::new();
    for (a, b) in skel.edges() {
        ones.insert(SubsetKey::new(NodeSet::from_nodes([a, b])).expect("two nodes"));
        for c in skel.neighbors(a).intersection(skel.neighbors(b)).iter().filter(|&c| c > b) {
            ones.insert(SubsetKey::new(NodeSet::from_nodes([a, b, c])).expect("three nodes"));
        }
    }
    for v in mec.vstructs() {
        ones.insert(SubsetKey::new(v.nodes()).expect("three nodes"));
    }
    ones
}

pub fn mec_restricted_imset(mec: &Mec) -> CharImset {
    CharImset::from_ones(mec.p(), ImsetMode::Restricted, mec_restricted_ones(mec)).expect("sizes 2 and 3")
}

/// Target of a delta applied to the size-2/3 coordinates, with a representative.
fn target_of(source_ones: &BTreeSet<SubsetKey>, p: usize, delta: &ImsetDelta) -> Option<(Mec, Dag)> {
    let ones = delta.restricted().apply_to(source_ones)?;
    let im = CharImset::from_ones(p, ImsetMode::Restricted, ones).ok()?;
    let m = recover_mec(&im).ok()?;
    let d = consistent_extension(&m)?;
    Some((m, d))
}

/// Apply the size-2/3 part of a move's delta.
pub fn apply_move(mec: &Mec, mv: &Move) -> Result<Mec> {
    target_of(&mec_restricted_ones(mec), mec.p(), &mv.delta)
        .map(|(m, _)| m)
        .ok_or(Error::NotRealizable)
}

/// Whether full imsets of the two MECs differ by exactly the move's delta.
pub fn verify_pair(source: &Mec, target: &Mec, mv: &Move) -> bool {
    match (consistent_extension(source), consistent_extension(target)) {
        (Some(s), Some(t)) => verify_dags(&s, &t, &mv.delta),
        _ => false,
    }
}

pub(crate) fn verify_dags(source: &Dag, target: &Dag, delta: &ImsetDelta) -> bool {
    delta.apply_to(&full_ones(source)).as_ref() == Some(&full_ones(target))
}

#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub mv: Move,
    pub target: Mec,
    pub target_dag: Dag,
}

static CAP_WARNED: AtomicBool = AtomicBool::new(false);

fn note_cap(n: NodeSet, cap: Option<usize>) {
    if let Some(c) = cap {
        if n.len() > c {
            if !CAP_WARNED.swap(true, Ordering::Relaxed) {
                log::warn!("subset cap {c} binds: a neighborhood has {} candidates", n.len());
            } else {
                log::debug!("subset cap {c} binds at neighborhood {n:?}");
            }
        }
    }
}

/// Subsets `S ⊆ cand` with `c(T ∪ {i}) = 1` for every nonempty `T ⊆ S`, in
/// size-then-lexicographic order. The family is closed under taking subsets.
fn valid_sets(dag: &Dag, i: usize, cand: NodeSet, cap: Option<usize>) -> Vec<NodeSet> {
    note_cap(cand, cap);
    let nodes = cand.to_vec();
    let k = nodes.len();
    let mut ok = vec![false; 1 << k];
    ok[0] = true;
    for m in 1usize..(1 << k) {
        let s: NodeSet = (0..k).filter(|b| m & (1 << b) != 0).map(|b| nodes[b]).collect();
        if cap.is_some_and(|c| s.len() > c) {
            continue;
        }
        ok[m] = (0..k).filter(|b| m & (1 << b) != 0).all(|b| ok[m & !(1 << b)]) && entry_raw(dag, s.with(i));
    }
    let mut out: Vec<NodeSet> = (0..(1usize << k))
        .filter(|&m| ok[m])
        .map(|m| (0..k).filter(|b| m & (1 << b) != 0).map(|b| nodes[b]).collect())
        .collect();
    out.sort_by(|a: &NodeSet, b: &NodeSet| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    out
}

struct Collector<'a> {
    source: &'a Mec,
    source_dag: &'a Dag,
    source_ones: BTreeSet<SubsetKey>,
    source_full: BTreeSet<SubsetKey>,
    seen: HashSet<Mec>,
    out: Vec<Candidate>,
}

impl<'a> Collector<'a> {
    fn new(source: &'a Mec, source_dag: &'a Dag) -> Self {
        Collector {
            source,
            source_dag,
            source_ones: mec_restricted_ones(source),
            source_full: full_ones(source_dag),
            seen: HashSet::new(),
            out: Vec::new(),
        }
    }

    fn all(&self, fam: &BTreeSet<SubsetKey>, v: bool) -> bool {
        fam.iter().all(|k| entry_raw(self.source_dag, k.set()) == v)
    }

    /// Forward when the `added` family is all zero and `removed` all one;
    /// backward (negated delta) in the opposite situation.
    fn offer_both(&mut self, mv: Move) {
        if self.all(&mv.delta.added, false) && self.all(&mv.delta.removed, true) {
            self.offer(mv);
        } else if self.all(&mv.delta.added, true) && self.all(&mv.delta.removed, false) {
            self.offer(mv.inverse());
        }
    }

    fn offer(&mut self, mv: Move) {
        let Some((target, target_dag)) = target_of(&self.source_ones, self.source.p(), &mv.delta) else {
            return;
        };
        if &target == self.source || self.seen.contains(&target) {
            return;
        }
        if mv.delta.apply_to(&self.source_full).as_ref() != Some(&full_ones(&target_dag)) {
            return;
        }
        self.seen.insert(target.clone());
        self.out.push(Candidate { mv, target, target_dag });
    }
}

fn representative(mec: &Mec) -> Option<Dag> {
    let d = consistent_extension(mec);
    if d.is_none() {
        log::warn!("enumeration requested on an unrealizable pattern");
    }
    d
}

pub(crate) fn turn_candidates(mec: &Mec, dag: &Dag, cap: Option<usize>) -> Vec<Candidate> {
    let skel = mec.skeleton();
    let mut c = Collector::new(mec, dag);
    for (a, b) in skel.edges() {
        for (i, j) in [(a, b), (b, a)] {
            let ne_i = skel.neighbors(i).without(j);
            let ne_j = skel.neighbors(j).without(i);
            let vi = valid_sets(dag, i, ne_i, cap);
            let vj = valid_sets(dag, j, ne_j, cap);
            for &s_i in vi.iter().filter(|s| !s.is_subset(skel.neighbors(j))) {
                c.offer_both(budding_move(i, j, s_i, skel));
                for &s_j in vj.iter().filter(|s| !s.is_subset(skel.neighbors(i))) {
                    c.offer_both(flip_move(i, j, s_i, s_j, skel));
                }
            }
        }
    }
    c.out
}

pub(crate) fn edge_candidates(mec: &Mec, dag: &Dag, cap: Option<usize>) -> Vec<Candidate> {
    let skel = mec.skeleton();
    let p = mec.p();
    let mut c = Collector::new(mec, dag);
    for a in 0..p {
        for b in a + 1..p {
            for (i, j) in [(a, b), (b, a)] {
                let vi = valid_sets(dag, i, skel.neighbors(i).without(j), cap);
                for &s in &vi {
                    c.offer_both(edge_pair_move(i, j, s));
                }
            }
        }
    }
    c.out
}

/// Non-backtracking walks with at least two centers and pairwise distinct
/// centers, as node sequences `c_0, c_1, …, c_{k+1}`.
fn center_walks(skel: &UndirectedGraph) -> Vec<Vec<usize>> {
    fn extend(skel: &UndirectedGraph, walk: &mut Vec<usize>, centers: NodeSet, out: &mut Vec<Vec<usize>>) {
        let n = walk.len();
        let last = walk[n - 1];
        let prev = walk[n - 2];
        for next in skel.neighbors(last).iter().filter(|&x| x != prev) {
            walk.push(next);
            // `last` is now a center
            if n >= 3 {
                out.push(walk.clone());
            }
            if !centers.with(last).contains(next) {
                extend(skel, walk, centers.with(last), out);
            }
            walk.pop();
        }
    }
    let mut out = Vec::new();
    for a in 0..skel.p() {
        for b in skel.neighbors(a).iter() {
            let mut w = vec![a, b];
            extend(skel, &mut w, NodeSet::EMPTY, &mut out);
        }
    }
    out
}

fn path_move(walk: &[usize]) -> Move {
    let k = walk.len() - 2;
    let triple = |t: usize| SubsetKey::from_nodes([walk[t - 1], walk[t], walk[t + 1]]).expect("distinct");
    let odd: BTreeSet<SubsetKey> = (1..=k).step_by(2).map(triple).collect();
    let even: BTreeSet<SubsetKey> = (2..=k).step_by(2).map(triple).collect();
    Move {
        kind: if k % 2 == 0 { MoveKind::Shift } else { MoveKind::Split },
        params: MoveParams::Path { path: walk.to_vec() },
        delta: ImsetDelta {
            added: odd,
            removed: even,
        },
    }
}

pub(crate) fn tree_candidates(mec: &Mec, dag: &Dag) -> Result<Vec<Candidate>> {
    let skel = mec.skeleton();
    for comp in skel.components() {
        let g = skel.induced(comp);
        let e = g.num_edges();
        if e + 1 != comp.len() && e != comp.len() {
            return Err(Error::InvalidGraph(
                "shifts and splits need every component to be a tree or a cycle".into(),
            ));
        }
        if e == comp.len() && !comp.iter().all(|x| skel.neighbors(x).len() == 2) {
            return Err(Error::InvalidGraph(
                "shifts and splits need every component to be a tree or a cycle".into(),
            ));
        }
    }
    let mut c = Collector::new(mec, dag);
    for walk in center_walks(skel) {
        let mv = path_move(&walk);
        if mv.delta.added.len() + mv.delta.removed.len() != walk.len() - 2 {
            continue;
        }
        c.offer_both(mv);
    }
    Ok(c.out)
}

fn strip(c: Vec<Candidate>) -> Vec<(Move, Mec)> {
    c.into_iter().map(|c| (c.mv, c.target)).collect()
}

/// All turn-pair neighbors (same skeleton) of a realizable MEC.
pub fn enumerate_turn_moves(mec: &Mec, cap: Option<usize>) -> Vec<(Move, Mec)> {
    match representative(mec) {
        Some(d) => strip(turn_candidates(mec, &d, cap)),
        None => Vec::new(),
    }
}

/// All edge-pair neighbors, both additions and deletions.
pub fn enumerate_edge_moves(mec: &Mec, cap: Option<usize>) -> Vec<(Move, Mec)> {
    match representative(mec) {
        Some(d) => strip(edge_candidates(mec, &d, cap)),
        None => Vec::new(),
    }
}

/// Shifts and splits along walks; the skeleton's components must be trees or cycles.
pub fn enumerate_tree_moves(mec: &Mec) -> Result<Vec<(Move, Mec)>> {
    let d = consistent_extension(mec).ok_or(Error::NotRealizable)?;
    Ok(strip(tree_candidates(mec, &d)?))
}

/// Apply a classified single-edge reversal or addition to a DAG's MEC.
pub fn reversal_target(dag: &Dag, i: usize, j: usize) -> Result<Mec> {
    Ok(mec_of(&dag.reverse_arc(i, j)?))
}
