use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodeset::NodeSet;

use super::{consistent_extension, Mec};

/// Completed partially directed graph of a MEC.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EssentialGraph {
    pub p: usize,
    /// Compelled arcs `(from, to)`.
    pub arcs: BTreeSet<(usize, usize)>,
    /// Reversible edges `(a, b)` with `a < b`.
    pub undirected: BTreeSet<(usize, usize)>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PairStatus {
    Absent,
    Undirected,
    Directed { from: usize, to: usize },
}

impl EssentialGraph {
    pub fn status(&self, a: usize, b: usize) -> PairStatus {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if self.undirected.contains(&(lo, hi)) {
            PairStatus::Undirected
        } else if self.arcs.contains(&(lo, hi)) {
            PairStatus::Directed { from: lo, to: hi }
        } else if self.arcs.contains(&(hi, lo)) {
            PairStatus::Directed { from: hi, to: lo }
        } else {
            PairStatus::Absent
        }
    }
}

struct Pdag {
    // dir[a] = {b : a -> b}
    dir: Vec<NodeSet>,
    und: Vec<NodeSet>,
}

impl Pdag {
    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.dir[a].contains(b) || self.dir[b].contains(a) || self.und[a].contains(b)
    }

    fn parents(&self, b: usize) -> NodeSet {
        (0..self.dir.len()).filter(|&a| self.dir[a].contains(b)).collect()
    }

    fn orient(&mut self, a: usize, b: usize) {
        self.und[a].remove(b);
        self.und[b].remove(a);
        self.dir[a].insert(b);
    }

    /// Whether Meek's rules R1-R4 compel `a -> b` for the undirected edge `a - b`.
    fn compelled(&self, a: usize, b: usize) -> bool {
        // R1: c -> a - b, c and b non-adjacent
        if self.parents(a).iter().any(|c| c != b && !self.adjacent(c, b)) {
            return true;
        }
        // R2: a -> c -> b
        if self.dir[a].iter().any(|c| self.dir[c].contains(b)) {
            return true;
        }
        // R3: a - c -> b, a - d -> b, c and d non-adjacent
        let mids: Vec<usize> = self.und[a].iter().filter(|&c| self.dir[c].contains(b)).collect();
        for (k, &c) in mids.iter().enumerate() {
            if mids[k + 1..].iter().any(|&d| !self.adjacent(c, d)) {
                return true;
            }
        }
        // R4: a - c -> d -> b, c and b non-adjacent, a adjacent to d
        for c in self.und[a].iter() {
            if c == b || self.adjacent(c, b) {
                continue;
            }
            for d in self.dir[c].iter() {
                if d != a && self.dir[d].contains(b) && self.adjacent(a, d) {
                    return true;
                }
            }
        }
        false
    }
}

/// Essential graph of a realizable MEC: v-structure arcs, then Meek's rules
/// applied until nothing changes.
pub fn essential_graph(mec: &Mec) -> Result<EssentialGraph> {
    if consistent_extension(mec).is_none() {
        return Err(Error::NotRealizable);
    }
    let p = mec.p();
    let skel = mec.skeleton();
    let mut g = Pdag {
        dir: vec![NodeSet::EMPTY; p],
        und: (0..p).map(|i| skel.neighbors(i)).collect(),
    };
    for v in mec.vstructs() {
        g.orient(v.tails.0, v.collider);
        g.orient(v.tails.1, v.collider);
    }
    loop {
        let mut changed = false;
        for a in 0..p {
            for b in g.und[a].iter() {
                if g.und[a].contains(b) && g.compelled(a, b) {
                    g.orient(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut arcs = BTreeSet::new();
    let mut undirected = BTreeSet::new();
    for a in 0..p {
        for b in g.dir[a].iter() {
            arcs.insert((a, b));
        }
        for b in g.und[a].iter().filter(|&b| b > a) {
            undirected.insert((a, b));
        }
    }
    Ok(EssentialGraph { p, arcs, undirected })
}

/// Structural Hamming distance between the essential graphs of `a` and `b`:
/// one unit per unordered pair whose status (absent, undirected, or directed
/// with a given orientation) differs.
pub fn shd(a: &Mec, b: &Mec) -> Result<usize> {
    if a.p() != b.p() {
        return Err(Error::InvalidArgument("SHD needs equal node counts".into()));
    }
    let ea = essential_graph(a)?;
    let eb = essential_graph(b)?;
    Ok(shd_essential(&ea, &eb))
}

pub(crate) fn shd_essential(ea: &EssentialGraph, eb: &EssentialGraph) -> usize {
    let p = ea.p;
    let mut d = 0;
    for i in 0..p {
        for j in i + 1..p {
            if ea.status(i, j) != eb.status(i, j) {
                d += 1;
            }
        }
    }
    d
}
