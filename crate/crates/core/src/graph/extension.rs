use crate::nodeset::NodeSet;

use super::{v_structures, Dag, Mec};

/// Dor–Tarsi extension of the pattern (skeleton + v-structure arcs).
///
/// Repeatedly peels a node `x` with no outgoing directed arc whose undirected
/// neighbors are adjacent to every other node adjacent to `x`; the smallest
/// eligible index is taken. Returns `None` when the peeling gets stuck, when
/// two v-structures demand opposite orientations of one edge, or when the
/// result does not reproduce exactly the requested v-structures.
pub fn consistent_extension(mec: &Mec) -> Option<Dag> {
    let p = mec.p();
    let skel = mec.skeleton();
    // out_dir[a] = heads of directed arcs a -> b; in_dir[b] = tails
    let mut out_dir = vec![NodeSet::EMPTY; p];
    let mut in_dir = vec![NodeSet::EMPTY; p];
    for v in mec.vstructs() {
        for t in [v.tails.0, v.tails.1] {
            if out_dir[v.collider].contains(t) {
                return None;
            }
            out_dir[t].insert(v.collider);
            in_dir[v.collider].insert(t);
        }
    }
    let mut undirected: Vec<NodeSet> = (0..p)
        .map(|i| skel.neighbors(i).difference(out_dir[i]).difference(in_dir[i]))
        .collect();

    let mut parents = vec![NodeSet::EMPTY; p];
    let mut alive = NodeSet::full(p);
    while !alive.is_empty() {
        let x = alive.iter().find(|&x| {
            if !out_dir[x].intersection(alive).is_empty() {
                return false;
            }
            let adj = skel.neighbors(x).intersection(alive);
            undirected[x]
                .intersection(alive)
                .iter()
                .all(|y| adj.without(y).is_subset(skel.neighbors(y)))
        })?;
        // every remaining edge at x points into x
        let adj = skel.neighbors(x).intersection(alive);
        parents[x] = adj;
        for y in undirected[x].intersection(alive).iter() {
            undirected[y].remove(x);
        }
        alive.remove(x);
    }
    let dag = Dag::from_parents(parents).ok()?;
    if &v_structures(&dag) != mec.vstructs() {
        return None;
    }
    Some(dag)
}
