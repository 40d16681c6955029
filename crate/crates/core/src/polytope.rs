//! Small-p laboratory for the characteristic imset polytope: vertex
//! enumeration, LP edge certificates, edge census and face checks.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{consistent_extension, is_acyclic, mec_of, Dag, Mec, UndirectedGraph};
use crate::imset::{all_coordinates, full_ones, SubsetKey};
use crate::lp::{maximize, rank, Scalar};
use crate::moves::{edge_candidates, tree_candidates, turn_candidates, Candidate, MoveKind};
use crate::nodeset::NodeSet;

/// Largest `p` for which [`enumerate_mecs`] builds all of `CIM_p`.
pub const MAX_FULL_NODES: usize = 5;
/// Certificates need a margin above this after `‖w‖∞ ≤ 1` normalization.
pub const LP_TOLERANCE: f64 = 1e-7;
/// Largest edge count for which all orientations of a skeleton are tried.
pub const MAX_SKELETON_EDGES: usize = 24;

/// Vertices of `CIM_p` or of a face `CIM_G`, with dense full imsets.
#[derive(Clone, Debug)]
pub struct VertexSet {
    p: usize,
    mecs: Vec<Mec>,
    coords: Vec<SubsetKey>,
    index: HashMap<SubsetKey, usize>,
    vectors: Vec<Vec<u8>>,
    lookup: HashMap<Mec, usize>,
    active: Vec<usize>,
}

impl VertexSet {
    pub fn from_mecs(p: usize, mecs: Vec<Mec>) -> Result<Self> {
        if p > crate::imset::FULL_IMSET_MAX_NODES {
            return Err(Error::TooManyNodes {
                p,
                max: crate::imset::FULL_IMSET_MAX_NODES,
            });
        }
        let coords = all_coordinates(p);
        let index: HashMap<SubsetKey, usize> = coords.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let mut vectors = Vec::with_capacity(mecs.len());
        for m in &mecs {
            let d = consistent_extension(m).ok_or(Error::NotRealizable)?;
            let mut v = vec![0u8; coords.len()];
            for k in full_ones(&d) {
                v[index[&k]] = 1;
            }
            vectors.push(v);
        }
        let lookup: HashMap<Mec, usize> = mecs.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect();
        if lookup.len() != mecs.len() {
            return Err(Error::InvalidArgument("duplicate MEC in vertex list".into()));
        }
        let active = (0..coords.len())
            .filter(|&k| vectors.iter().any(|v| v[k] != vectors[0][k]))
            .collect();
        Ok(VertexSet {
            p,
            mecs,
            coords,
            index,
            vectors,
            lookup,
            active,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.mecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mecs.is_empty()
    }

    pub fn mecs(&self) -> &[Mec] {
        &self.mecs
    }

    pub fn mec(&self, k: usize) -> &Mec {
        &self.mecs[k]
    }

    pub fn vector(&self, k: usize) -> &[u8] {
        &self.vectors[k]
    }

    pub fn coords(&self) -> &[SubsetKey] {
        &self.coords
    }

    pub fn coordinate(&self, s: SubsetKey) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn index_of(&self, m: &Mec) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    /// Coordinates that vary across the vertices.
    pub fn active_coords(&self) -> &[usize] {
        &self.active
    }
}

fn dags_on_skeleton(g: &UndirectedGraph) -> Result<Vec<Dag>> {
    let edges = g.edges();
    if edges.len() > MAX_SKELETON_EDGES {
        return Err(Error::InvalidArgument(format!(
            "{} edges exceed the orientation limit {MAX_SKELETON_EDGES}",
            edges.len()
        )));
    }
    let p = g.p();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << edges.len()) {
        let mut parents = vec![NodeSet::EMPTY; p];
        for (k, &(a, b)) in edges.iter().enumerate() {
            if mask >> k & 1 == 0 {
                parents[b].insert(a);
            } else {
                parents[a].insert(b);
            }
        }
        if is_acyclic(&parents) {
            out.push(Dag::from_parents(parents)?);
        }
    }
    Ok(out)
}

/// All MECs with skeleton exactly `g`, in sorted order.
pub fn mecs_with_skeleton(g: &UndirectedGraph) -> Result<Vec<Mec>> {
    let set: BTreeSet<Mec> = dags_on_skeleton(g)?.iter().map(mec_of).collect();
    Ok(set.into_iter().collect())
}

pub fn enumerate_mecs_with_skeleton(g: &UndirectedGraph) -> Result<VertexSet> {
    VertexSet::from_mecs(g.p(), mecs_with_skeleton(g)?)
}

/// Every MEC on `p ≤ 5` nodes, grouped by skeleton in edge-mask order.
pub fn enumerate_mecs(p: usize) -> Result<VertexSet> {
    if p > MAX_FULL_NODES {
        return Err(Error::TooManyNodes { p, max: MAX_FULL_NODES });
    }
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b))).collect();
    let mut mecs = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let e: Vec<(usize, usize)> = (0..pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| pairs[k]).collect();
        let g = UndirectedGraph::from_edges(p, &e)?;
        mecs.extend(mecs_with_skeleton(&g)?);
    }
    VertexSet::from_mecs(p, mecs)
}

/// Objective exposing `conv(u, v)` as a face, with its margin.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeCertificate {
    pub u: usize,
    pub v: usize,
    /// Indexed like [`VertexSet::coords`]; zero on constant coordinates.
    pub w: Vec<f64>,
    pub margin: f64,
    pub exact: bool,
}

impl EdgeCertificate {
    /// Re-evaluate `w` on every vertex: returns (min gap to others, |w·(u−v)|).
    pub fn check(&self, vs: &VertexSet) -> (f64, f64) {
        let dot = |k: usize| -> f64 { self.w.iter().zip(vs.vector(k)).map(|(w, &x)| w * x as f64).sum() };
        let wu = dot(self.u);
        let gap = (0..vs.len())
            .filter(|&x| x != self.u && x != self.v)
            .map(|x| wu - dot(x))
            .fold(f64::INFINITY, f64::min);
        (gap, (wu - dot(self.v)).abs())
    }
}

fn solve_edge_lp<T: Scalar>(vs: &VertexSet, u: usize, v: usize) -> Result<(T, Vec<T>)> {
    let act = vs.active_coords();
    let d = act.len();
    let diff = |x: usize| -> Vec<i64> {
        act.iter()
            .map(|&k| vs.vector(u)[k] as i64 - vs.vector(x)[k] as i64)
            .collect()
    };
    let n = 2 * d + 1;
    let mut a: Vec<Vec<T>> = Vec::new();
    let mut b: Vec<T> = Vec::new();
    for x in (0..vs.len()).filter(|&x| x != u && x != v) {
        let dx = diff(x);
        let mut row = Vec::with_capacity(n);
        row.extend(dx.iter().map(|&q| T::from_i64(-q)));
        row.extend(dx.iter().map(|&q| T::from_i64(q)));
        row.push(T::one());
        a.push(row);
        b.push(T::zero());
    }
    let dv = diff(v);
    for sign in [1i64, -1] {
        let mut row = Vec::with_capacity(n);
        row.extend(dv.iter().map(|&q| T::from_i64(sign * q)));
        row.extend(dv.iter().map(|&q| T::from_i64(-sign * q)));
        row.push(T::zero());
        a.push(row);
        b.push(T::zero());
    }
    for k in 0..n {
        let mut row = vec![T::zero(); n];
        row[k] = T::one();
        a.push(row);
        b.push(T::one());
    }
    let mut c = vec![T::zero(); n];
    c[n - 1] = T::one();
    let sol = maximize(&a, &b, &c)?;
    let mut w = vec![T::zero(); vs.coords().len()];
    for (q, &k) in act.iter().enumerate() {
        w[k] = sol.x[q].sub(&sol.x[d + q]);
    }
    Ok((sol.value, w))
}

/// LP certificate that `conv(c_u, c_v)` is an edge, or `None` if it is not.
///
/// Solved in floating point; margins within a factor 10 of
/// [`LP_TOLERANCE`], or certificates that fail re-evaluation, are re-solved
/// in exact rational arithmetic.
pub fn certify_edge(u: usize, v: usize, vs: &VertexSet) -> Result<Option<EdgeCertificate>> {
    if u == v {
        return Err(Error::InvalidArgument("certify_edge needs two distinct vertices".into()));
    }
    if u >= vs.len() || v >= vs.len() {
        return Err(Error::InvalidArgument("vertex index out of range".into()));
    }
    let (t, w) = solve_edge_lp::<f64>(vs, u, v)?;
    let cert = EdgeCertificate {
        u,
        v,
        w,
        margin: t,
        exact: false,
    };
    let (gap, eq) = cert.check(vs);
    let consistent = eq < 1e-9 && (gap - t).abs() < 1e-9 || (vs.len() == 2 && eq < 1e-9);
    let borderline = t > LP_TOLERANCE / 10.0 && t < LP_TOLERANCE * 10.0;
    if consistent && !borderline {
        return Ok((t > LP_TOLERANCE).then_some(cert));
    }
    log::debug!("exact re-solve for pair ({u}, {v}), float margin {t:e}");
    let (tq, wq) = solve_edge_lp::<BigRational>(vs, u, v)?;
    if !tq.is_pos() {
        return Ok(None);
    }
    Ok(Some(EdgeCertificate {
        u,
        v,
        w: wq.iter().map(Scalar::to_f64).collect(),
        margin: tq.to_f64(),
        exact: true,
    }))
}

/// Certify every unordered pair; returns certificates in pair order.
pub fn certify_all(vs: &VertexSet) -> Result<Vec<EdgeCertificate>> {
    let pairs: Vec<(usize, usize)> = (0..vs.len()).flat_map(|u| (u + 1..vs.len()).map(move |v| (u, v))).collect();
    let res: Vec<Result<Option<EdgeCertificate>>> = pairs.par_iter().map(|&(u, v)| certify_edge(u, v, vs)).collect();
    let mut out = Vec::new();
    for r in res {
        if let Some(c) = r? {
            out.push(c);
        }
    }
    Ok(out)
}

/// Move families found between two vertices, from enumeration at either end.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PairLabel {
    pub kinds: BTreeSet<MoveKind>,
    /// Edge pair whose delta is the single 2-set.
    pub edge_addition: bool,
}

impl PairLabel {
    pub fn primary(&self) -> Option<MoveKind> {
        self.kinds.iter().next().copied()
    }

    pub fn is_turn(&self) -> bool {
        self.kinds.iter().any(|k| k.is_turn())
    }
}

fn skeleton_is_tree_or_cycle_union(g: &UndirectedGraph) -> bool {
    g.components().into_iter().all(|c| {
        let h = g.induced(c);
        h.is_tree() || h.is_cycle()
    })
}

/// Labels of every enumerated move between vertices of `vs`, keyed by
/// ordered `(source, target)`. Targets outside `vs` are dropped.
pub fn label_moves(vs: &VertexSet, with_edges: bool) -> BTreeMap<(usize, usize), PairLabel> {
    let per_vertex: Vec<Vec<(usize, Candidate)>> = (0..vs.len())
        .into_par_iter()
        .map(|u| {
            let m = vs.mec(u);
            let Some(d) = consistent_extension(m) else {
                return Vec::new();
            };
            let mut cands = turn_candidates(m, &d, None);
            if with_edges {
                cands.extend(edge_candidates(m, &d, None));
            }
            if skeleton_is_tree_or_cycle_union(m.skeleton()) {
                cands.extend(tree_candidates(m, &d).unwrap_or_default());
            }
            cands
                .into_iter()
                .filter_map(|c| vs.index_of(&c.target).map(|t| (t, c)))
                .collect()
        })
        .collect();
    let mut out: BTreeMap<(usize, usize), PairLabel> = BTreeMap::new();
    for (u, list) in per_vertex.into_iter().enumerate() {
        for (t, c) in list {
            let e = out.entry((u, t)).or_default();
            e.kinds.insert(c.mv.kind);
            if c.mv.kind == MoveKind::EdgePair && c.mv.delta.added.len() + c.mv.delta.removed.len() == 1 {
                e.edge_addition = true;
            }
        }
    }
    out
}

/// Canonical edge list of a graph's isomorphism class (lexicographically
/// smallest relabeling), found by trying every permutation.
pub fn canonical_skeleton(g: &UndirectedGraph) -> Vec<(usize, usize)> {
    let p = g.p();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut e = g.permuted(&perm).edges();
        e.sort();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Clone, Debug, Serialize)]
pub struct SkeletonResidual {
    pub canonical_edges: Vec<(usize, usize)>,
    pub labelings: usize,
    pub same_skeleton_edges: usize,
    pub non_turn_edges: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Soundness {
    pub enumerated_pairs: usize,
    pub certified: usize,
    pub counterexamples: Vec<(usize, usize, MoveKind)>,
}

/// Edge census in the row labels of the `CIM_4` tables.
#[derive(Clone, Debug, Serialize)]
pub struct Census {
    pub p: usize,
    pub vertices: usize,
    pub pairs_tested: usize,
    pub total_edges: usize,
    pub exact_resolves: usize,
    #[serde(rename = "v-structure additions")]
    pub v_structure_additions: usize,
    #[serde(rename = "Buddings")]
    pub buddings: usize,
    #[serde(rename = "Flips")]
    pub flips: usize,
    #[serde(rename = "Turn pairs")]
    pub turn_pairs: usize,
    #[serde(rename = "Edge additions")]
    pub edge_additions: usize,
    #[serde(rename = "Edge pairs that are not edge additions")]
    pub edge_pairs_not_additions: usize,
    #[serde(rename = "Edge pairs")]
    pub edge_pairs: usize,
    pub shifts: usize,
    pub splits: usize,
    pub multiply_labeled: usize,
    pub unclassified: usize,
    pub same_skeleton_edges: usize,
    pub same_skeleton_non_turn: usize,
    pub residuals_by_skeleton: Vec<SkeletonResidual>,
    pub soundness: Soundness,
}

/// Tag certified edges by move family and tally them.
pub fn classify_edges(vs: &VertexSet, edges: &[(usize, usize)]) -> Census {
    let labels = label_moves(vs, true);
    let edge_set: HashSet<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let mut c = Census {
        p: vs.p(),
        vertices: vs.len(),
        pairs_tested: vs.len() * vs.len().saturating_sub(1) / 2,
        total_edges: edge_set.len(),
        exact_resolves: 0,
        v_structure_additions: 0,
        buddings: 0,
        flips: 0,
        turn_pairs: 0,
        edge_additions: 0,
        edge_pairs_not_additions: 0,
        edge_pairs: 0,
        shifts: 0,
        splits: 0,
        multiply_labeled: 0,
        unclassified: 0,
        same_skeleton_edges: 0,
        same_skeleton_non_turn: 0,
        residuals_by_skeleton: Vec::new(),
        soundness: Soundness::default(),
    };
    for (&(u, t), l) in &labels {
        if u < t || !labels.contains_key(&(t, u)) {
            let key = (u.min(t), u.max(t));
            c.soundness.enumerated_pairs += 1;
            if edge_set.contains(&key) {
                c.soundness.certified += 1;
            } else {
                c.soundness.counterexamples.push((key.0, key.1, l.primary().expect("nonempty")));
            }
        }
    }
    let mut residual: BTreeMap<Vec<(usize, usize)>, (BTreeSet<Vec<(usize, usize)>>, usize, usize)> = BTreeMap::new();
    let mut sorted: Vec<(usize, usize)> = edge_set.iter().copied().collect();
    sorted.sort();
    for (u, v) in sorted {
        let mut l = labels.get(&(u, v)).cloned().unwrap_or_default();
        if let Some(r) = labels.get(&(v, u)) {
            l.kinds.extend(r.kinds.iter().copied());
            l.edge_addition |= r.edge_addition;
        }
        if l.kinds.len() > 1 {
            c.multiply_labeled += 1;
        }
        match l.primary() {
            Some(MoveKind::VStructureAddition) => c.v_structure_additions += 1,
            Some(MoveKind::Budding) => c.buddings += 1,
            Some(MoveKind::Flip) => c.flips += 1,
            Some(MoveKind::EdgePair) if l.edge_addition => c.edge_additions += 1,
            Some(MoveKind::EdgePair) => c.edge_pairs_not_additions += 1,
            Some(MoveKind::Shift) => c.shifts += 1,
            Some(MoveKind::Split) => c.splits += 1,
            None => c.unclassified += 1,
        }
        let (su, sv) = (vs.mec(u).skeleton(), vs.mec(v).skeleton());
        if su == sv {
            c.same_skeleton_edges += 1;
            let canon = canonical_skeleton(su);
            let entry = residual.entry(canon).or_default();
            entry.0.insert(su.edges());
            entry.1 += 1;
            if !l.is_turn() {
                c.same_skeleton_non_turn += 1;
                entry.2 += 1;
            }
        }
    }
    c.turn_pairs = c.v_structure_additions + c.buddings + c.flips;
    c.edge_pairs = c.edge_additions + c.edge_pairs_not_additions;
    let mut res: Vec<SkeletonResidual> = residual
        .into_iter()
        .filter(|(_, r)| r.2 > 0)
        .map(|(canonical_edges, (labs, same, non_turn))| SkeletonResidual {
            canonical_edges,
            labelings: labs.len(),
            same_skeleton_edges: same,
            non_turn_edges: non_turn,
        })
        .collect();
    res.sort_by(|a, b| b.non_turn_edges.cmp(&a.non_turn_edges).then(a.canonical_edges.cmp(&b.canonical_edges)));
    c.residuals_by_skeleton = res;
    c
}

/// Certify every pair of `vs` and classify the resulting edges.
pub fn census(vs: &VertexSet) -> Result<(Census, Vec<EdgeCertificate>)> {
    let certs = certify_all(vs)?;
    let edges: Vec<(usize, usize)> = certs.iter().map(|c| (c.u, c.v)).collect();
    let mut c = classify_edges(vs, &edges);
    c.exact_resolves = certs.iter().filter(|c| c.exact).count();
    Ok((c, certs))
}

/// Face objective for the skeleton interval `E ⊆ skeleton ⊆ E'`: 1 on `E`,
/// 0 on `E' ∖ E`, −1 on the other 2-sets, 0 on larger sets.
pub fn face_objective(h: &UndirectedGraph, h_prime: &UndirectedGraph) -> Result<Vec<i32>> {
    if h.p() != h_prime.p() {
        return Err(Error::InvalidArgument("graphs on different node sets".into()));
    }
    if h.edges().iter().any(|&(a, b)| !h_prime.has_edge(a, b)) {
        return Err(Error::InvalidArgument("E is not contained in E'".into()));
    }
    Ok(all_coordinates(h.p())
        .into_iter()
        .map(|k| {
            if k.len() != 2 {
                return 0;
            }
            let v = k.to_vec();
            if h.has_edge(v[0], v[1]) {
                1
            } else if h_prime.has_edge(v[0], v[1]) {
                0
            } else {
                -1
            }
        })
        .collect())
}

/// Indices of the vertices maximizing an integer objective.
pub fn maximizers(vs: &VertexSet, w: &[i32]) -> Vec<usize> {
    let val = |k: usize| -> i64 { w.iter().zip(vs.vector(k)).map(|(&a, &x)| a as i64 * x as i64).sum() };
    let best = (0..vs.len()).map(val).max();
    (0..vs.len()).filter(|&k| Some(val(k)) == best).collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabKind {
    Path,
    Cycle,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabReport {
    pub kind: StabKind,
    pub p: usize,
    pub vertices: usize,
    pub stable_sets: usize,
    /// MECs biject with all stable sets of the center graph.
    pub bijection: bool,
    /// MECs biject with the nonempty stable sets.
    pub bijection_nonempty: bool,
    pub coordinates_match: bool,
    pub lp_edges: usize,
    pub chvatal_edges: usize,
    pub edges_match: bool,
    pub labeled_pairs: usize,
    pub classification_match: bool,
    pub additions: usize,
    pub shifts: usize,
    pub splits: usize,
}

impl StabReport {
    pub fn ok(&self) -> bool {
        self.bijection && self.coordinates_match && self.edges_match && self.classification_match
    }

    pub fn vertex_count_ok(&self) -> bool {
        self.vertices == self.stable_sets
    }
}

/// Check the stable-set description of `CIM_G` for a path or cycle on `p` nodes.
pub fn verify_stab_equivalence(kind: StabKind, p: usize) -> Result<StabReport> {
    let min = if kind == StabKind::Path { 2 } else { 4 };
    if !(min..=9).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside {min}..=9")));
    }
    let g = match kind {
        StabKind::Path => UndirectedGraph::path(p),
        StabKind::Cycle => UndirectedGraph::cycle(p),
    };
    // centers and the graph they form
    let centers: Vec<usize> = match kind {
        StabKind::Path => (1..p - 1).collect(),
        StabKind::Cycle => (0..p).collect(),
    };
    let nc = centers.len();
    let center_adj = |a: usize, b: usize| -> bool {
        match kind {
            StabKind::Path => a.abs_diff(b) == 1,
            StabKind::Cycle => (a + 1) % nc == b || (b + 1) % nc == a,
        }
    };
    let triple = |c: usize| -> SubsetKey {
        SubsetKey::from_nodes([(c + p - 1) % p, c, (c + 1) % p]).expect("three nodes")
    };
    let stable: Vec<u64> = (0u64..(1u64 << nc))
        .filter(|&m| (0..nc).all(|a| (0..nc).all(|b| a == b || m >> a & 1 == 0 || m >> b & 1 == 0 || !center_adj(a, b))))
        .collect();

    let vs = enumerate_mecs_with_skeleton(&g)?;
    let sets: Vec<u64> = vs
        .mecs()
        .iter()
        .map(|m| {
            m.vstructs()
                .iter()
                .map(|v| 1u64 << centers.iter().position(|&c| c == v.collider).expect("collider is a center"))
                .fold(0, |a, b| a | b)
        })
        .collect();
    let distinct: HashSet<u64> = sets.iter().copied().collect();
    let stable_set: HashSet<u64> = stable.iter().copied().collect();
    let bijection = distinct.len() == sets.len() && distinct == stable_set;
    let nonempty: HashSet<u64> = stable_set.iter().copied().filter(|&m| m != 0).collect();
    let bijection_nonempty = distinct.len() == sets.len() && distinct == nonempty;

    let triple_coords: HashSet<usize> = centers.iter().map(|&c| vs.coordinate(triple(c)).expect("in range")).collect();
    let coordinates_match = vs.active_coords().iter().all(|k| triple_coords.contains(k))
        && (0..vs.len()).all(|x| {
            centers.iter().enumerate().all(|(q, &c)| {
                vs.vector(x)[vs.coordinate(triple(c)).expect("in range")] == (sets[x] >> q & 1) as u8
            })
        });

    let lp: HashSet<(usize, usize)> = certify_all(&vs)?.iter().map(|c| (c.u, c.v)).collect();
    let connected = |m: u64| -> bool {
        if m == 0 {
            return false;
        }
        let start = m.trailing_zeros() as usize;
        let mut seen = 1u64 << start;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for b in 0..nc {
                if m >> b & 1 == 1 && seen >> b & 1 == 0 && center_adj(a, b) {
                    seen |= 1 << b;
                    queue.push_back(b);
                }
            }
        }
        seen == m
    };
    let mut chv = HashSet::new();
    for u in 0..vs.len() {
        for v in u + 1..vs.len() {
            if connected(sets[u] ^ sets[v]) {
                chv.insert((u, v));
            }
        }
    }

    let labels = label_moves(&vs, false);
    let mut good = HashSet::new();
    let (mut additions, mut shifts, mut splits) = (0, 0, 0);
    let mut seen = HashSet::new();
    for (&(u, t), l) in &labels {
        let key = (u.min(t), u.max(t));
        let family = l.kinds.iter().any(|k| {
            matches!(k, MoveKind::VStructureAddition | MoveKind::Shift | MoveKind::Split)
        });
        if family {
            good.insert(key);
        }
        if seen.insert(key) {
            if l.kinds.contains(&MoveKind::VStructureAddition) {
                additions += 1;
            } else if l.kinds.contains(&MoveKind::Shift) {
                shifts += 1;
            } else if l.kinds.contains(&MoveKind::Split) {
                splits += 1;
            }
        }
    }
    let labeled: HashSet<(usize, usize)> = seen;
    Ok(StabReport {
        kind,
        p,
        vertices: vs.len(),
        stable_sets: stable.len(),
        bijection,
        bijection_nonempty,
        coordinates_match,
        lp_edges: lp.len(),
        chvatal_edges: chv.len(),
        edges_match: lp == chv,
        labeled_pairs: labeled.len(),
        classification_match: good == lp && labeled.is_subset(&lp),
        additions,
        shifts,
        splits,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplexFamily {
    pub name: String,
    pub edges: Vec<(usize, usize)>,
    pub vertices: usize,
    pub expected_dimension: usize,
    pub affine_rank: usize,
    pub poset_rank: usize,
}

impl SimplexFamily {
    pub fn ok(&self) -> bool {
        self.vertices == self.expected_dimension + 1
            && self.affine_rank == self.expected_dimension
            && self.poset_rank == self.vertices
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplexReport {
    pub p: usize,
    pub families: Vec<SimplexFamily>,
}

impl SimplexReport {
    pub fn ok(&self) -> bool {
        self.families.iter().all(SimplexFamily::ok)
    }
}

fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(n)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Star over disjoint cliques: node `p − 1` joined to cliques of the given sizes.
pub fn star_over_cliques(sizes: &[usize]) -> UndirectedGraph {
    let p = sizes.iter().sum::<usize>() + 1;
    let mut g = UndirectedGraph::empty(p);
    let mut start = 0;
    for &s in sizes {
        for a in start..start + s {
            g.add_edge(a, p - 1);
            for b in a + 1..start + s {
                g.add_edge(a, b);
            }
        }
        start += s;
    }
    g
}

/// Complete graph without the edge `0 - 1`.
pub fn complete_minus_edge(p: usize) -> UndirectedGraph {
    let mut g = UndirectedGraph::complete(p);
    g.remove_edge(0, 1);
    g
}

/// Rank of `{b_q = Σ_{r ⪯ q} e_r}` for a finite poset given by `leq[r][q]`.
pub fn mobius_basis_rank(leq: &[Vec<bool>]) -> usize {
    let n = leq.len();
    let rows: Vec<Vec<BigRational>> = (0..n)
        .map(|q| (0..n).map(|r| BigRational::from_i64(leq[r][q] as i64)).collect())
        .collect();
    rank(&rows)
}

fn family(name: String, g: UndirectedGraph, expected: usize) -> Result<SimplexFamily> {
    let vs = enumerate_mecs_with_skeleton(&g)?;
    let n = vs.len();
    let diffs: Vec<Vec<BigRational>> = (1..n)
        .map(|k| {
            (0..vs.coords().len())
                .map(|c| BigRational::from_i64(vs.vector(k)[c] as i64 - vs.vector(0)[c] as i64))
                .collect()
        })
        .collect();
    let affine_rank = if n > 1 { rank(&diffs) } else { 0 };
    let leq: Vec<Vec<bool>> = (0..n)
        .map(|r| (0..n).map(|q| vs.mec(r).vstructs().is_subset(vs.mec(q).vstructs())).collect())
        .collect();
    Ok(SimplexFamily {
        name,
        edges: g.edges(),
        vertices: n,
        expected_dimension: expected,
        affine_rank,
        poset_rank: mobius_basis_rank(&leq),
    })
}

/// Simplex faces: stars over disjoint cliques and `K_p` minus one edge.
pub fn verify_simplex_faces(p: usize) -> Result<SimplexReport> {
    if !(4..=6).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside 4..=6")));
    }
    let mut families = Vec::new();
    for sizes in partitions(p - 1, p - 1) {
        let d = (1usize << (p - 1)) - 1 - sizes.iter().map(|&s| (1usize << s) - 1).sum::<usize>();
        families.push(family(format!("star over cliques {sizes:?}"), star_over_cliques(&sizes), d)?);
    }
    families.push(family(format!("K_{p} minus an edge"), complete_minus_edge(p), (1 << (p - 2)) - 1)?);
    Ok(SimplexReport { p, families })
}

/// Whether turn pairs connect all MECs with skeleton `g`.
pub fn turn_graph_connected(g: &UndirectedGraph) -> Result<bool> {
    let vs = enumerate_mecs_with_skeleton(g)?;
    if vs.len() <= 1 {
        return Ok(true);
    }
    let mut seen = vec![false; vs.len()];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let m = vs.mec(u);
        let d = consistent_extension(m).ok_or(Error::NotRealizable)?;
        for c in turn_candidates(m, &d, None) {
            if let Some(t) = vs.index_of(&c.target) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(seen.into_iter().all(|s| s))
}
