//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's imset or equivalence code.

#![allow(dead_code)]

use cimwalk::graph::{Dag, UndirectedGraph};

/// Parent bitmasks of every DAG on `p` nodes.
pub fn all_dags(p: usize) -> Vec<Vec<u32>> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for mut code in 0..total {
        let mut pa = vec![0u32; p];
        for &(a, b) in &pairs {
            match code % 3 {
                1 => pa[b] |= 1 << a,
                2 => pa[a] |= 1 << b,
                _ => {}
            }
            code /= 3;
        }
        if acyclic(&pa) {
            out.push(pa);
        }
    }
    out
}

/// Parent bitmasks of every acyclic orientation of `edges`.
pub fn orientations(p: usize, edges: &[(usize, usize)]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for code in 0u64..(1 << edges.len()) {
        let mut pa = vec![0u32; p];
        for (k, &(a, b)) in edges.iter().enumerate() {
            if code >> k & 1 == 1 {
                pa[a] |= 1 << b;
            } else {
                pa[b] |= 1 << a;
            }
        }
        if acyclic(&pa) {
            out.push(pa);
        }
    }
    out
}

pub fn acyclic(pa: &[u32]) -> bool {
    let mut placed = 0u32;
    for _ in 0..pa.len() {
        match (0..pa.len()).find(|&i| placed >> i & 1 == 0 && pa[i] & !placed == 0) {
            Some(i) => placed |= 1 << i,
            None => return false,
        }
    }
    true
}

pub fn to_dag(pa: &[u32]) -> Dag {
    let arcs: Vec<(usize, usize)> = (0..pa.len())
        .flat_map(|i| (0..pa.len()).filter(move |&k| pa[i] >> k & 1 == 1).map(move |k| (k, i)))
        .collect();
    Dag::from_arcs(pa.len(), &arcs).expect("acyclic by construction")
}

pub fn from_dag(d: &Dag) -> Vec<u32> {
    (0..d.p())
        .map(|i| d.parents(i).iter().fold(0u32, |m, k| m | 1 << k))
        .collect()
}

/// Dense full imset straight from the definition: entry `S` (a bitmask with
/// at least two bits) is 1 iff some `i ∈ S` has `S ∖ {i} ⊆ pa(i)`.
pub fn imset_bits(pa: &[u32]) -> Vec<u32> {
    let p = pa.len();
    (0u32..(1 << p))
        .filter(|s| s.count_ones() >= 2)
        .filter(|&s| (0..p).any(|i| s >> i & 1 == 1 && (s & !(1 << i)) & !pa[i] == 0))
        .collect()
}

/// Entries with `|S| ≤ 3` only.
pub fn restricted_bits(pa: &[u32]) -> Vec<u32> {
    imset_bits(pa).into_iter().filter(|s| s.count_ones() <= 3).collect()
}

pub fn skeleton_of(pa: &[u32]) -> UndirectedGraph {
    let p = pa.len();
    let mut g = UndirectedGraph::empty(p);
    for i in 0..p {
        for k in 0..p {
            if pa[i] >> k & 1 == 1 {
                g.add_edge(i, k);
            }
        }
    }
    g
}

/// Every simple graph on `p` labeled nodes.
pub fn all_graphs(p: usize) -> Vec<UndirectedGraph> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b))).collect();
    (0u64..(1 << pairs.len()))
        .map(|m| {
            let e: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(k, _)| m >> k & 1 == 1).map(|(_, &e)| e).collect();
            UndirectedGraph::from_edges(p, &e).unwrap()
        })
        .collect()
}
