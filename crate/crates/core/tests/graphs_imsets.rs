mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use cimwalk::graph::{
    consistent_extension, essential_graph, markov_equivalent, mec_of, parse_graph_text, shd, Dag, Mec, UndirectedGraph,
};
use cimwalk::imset::{full_imset, recover_mec, restricted_imset, CharImset, ImsetMode};
use cimwalk::polytope::{enumerate_mecs, enumerate_mecs_with_skeleton};

use common::{all_dags, from_dag, imset_bits, to_dag};

fn bits(c: &CharImset) -> Vec<u32> {
    let mut v: Vec<u32> = c.ones().iter().map(|k| k.set().iter().fold(0, |m, i| m | 1 << i)).collect();
    v.sort_unstable();
    v
}

fn arb_dag(max_p: usize) -> impl Strategy<Value = Dag> {
    (2..=max_p)
        .prop_flat_map(|p| (Just(p), proptest::collection::vec(any::<bool>(), p * (p - 1) / 2), Just(p)))
        .prop_flat_map(|(p, edges, _)| (Just(p), Just(edges), Just((0..p).collect::<Vec<usize>>()).prop_shuffle()))
        .prop_map(|(p, edges, order)| {
            let mut arcs = Vec::new();
            let mut k = 0;
            for a in 0..p {
                for b in a + 1..p {
                    if edges[k] {
                        arcs.push((order[a], order[b]));
                    }
                    k += 1;
                }
            }
            Dag::from_arcs(p, &arcs).unwrap()
        })
}

#[test]
fn mec_counts_match_brute_force() {
    for (p, want) in [(2, 2), (3, 11), (4, 185)] {
        let distinct: HashSet<Vec<u32>> = all_dags(p).iter().map(|pa| imset_bits(pa)).collect();
        assert_eq!(distinct.len(), want);
        assert_eq!(enumerate_mecs(p).unwrap().len(), want);
    }
    assert_eq!(all_dags(3).len(), 25);
    assert!(enumerate_mecs(6).is_err());
}

#[test]
fn path_face_has_three_vertices() {
    assert_eq!(enumerate_mecs_with_skeleton(&UndirectedGraph::path(4)).unwrap().len(), 3);
}

#[test]
fn markov_equivalence_is_imset_equality() {
    let dags = all_dags(3);
    for a in &dags {
        for b in &dags {
            assert_eq!(markov_equivalent(&to_dag(a), &to_dag(b)), imset_bits(a) == imset_bits(b));
        }
    }
}

#[test]
fn meek_first_rule_stops_at_sourceless_node() {
    // 0 -> 1 <- 2 plus 2 - 3: node 2 has no parents, so 2 - 3 stays reversible.
    let skel = UndirectedGraph::path(4);
    let m = Mec::new(skel.clone(), [cimwalk::graph::VStructure::new(0, 1, 2)].into()).unwrap();
    let e = essential_graph(&m).unwrap();
    assert!(e.undirected.contains(&(2, 3)));
    let dag = Dag::from_arcs(4, &[(0, 1), (2, 1), (3, 2)]).unwrap();
    assert_eq!(mec_of(&dag), m);
    // 0 -> 2 <- 1, 2 - 3: Meek's first rule compels 2 -> 3.
    let star = UndirectedGraph::from_edges(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
    let m = Mec::new(star, [cimwalk::graph::VStructure::new(0, 2, 1)].into()).unwrap();
    assert!(essential_graph(&m).unwrap().arcs.contains(&(2, 3)));
}

#[test]
fn shd_counts_mismatched_pairs() {
    let chain = mec_of(&Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap());
    let collider = mec_of(&Dag::from_arcs(3, &[(0, 1), (2, 1)]).unwrap());
    let empty = Mec::empty(3);
    assert_eq!(shd(&chain, &chain).unwrap(), 0);
    assert_eq!(shd(&chain, &collider).unwrap(), 2);
    assert_eq!(shd(&chain, &empty).unwrap(), 2);
}

#[test]
fn text_round_trip() {
    let d = Dag::from_arcs(4, &[(0, 1), (2, 1), (1, 3)]).unwrap();
    let back = parse_graph_text(&d.to_text()).unwrap().into_dag().unwrap();
    assert_eq!(back, d);
    assert!(parse_graph_text("p 3\n0 -> 1\n1 -> 0\n").is_err());
    assert!(parse_graph_text("p 2\n0 -> 5\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn extension_round_trip(d in arb_dag(9)) {
        let m = mec_of(&d);
        let e = consistent_extension(&m).unwrap();
        prop_assert_eq!(mec_of(&e), m);
        prop_assert_eq!(imset_bits(&from_dag(&e)), imset_bits(&from_dag(&d)));
    }

    #[test]
    fn full_imset_matches_definition(d in arb_dag(8)) {
        prop_assert_eq!(bits(&full_imset(&d).unwrap()), imset_bits(&from_dag(&d)));
    }

    #[test]
    fn restricted_imset_recovers_mec(d in arb_dag(9)) {
        let r = restricted_imset(&d);
        prop_assert_eq!(r.mode(), ImsetMode::Restricted);
        prop_assert_eq!(recover_mec(&r).unwrap(), mec_of(&d));
        let j = serde_json::to_string(&r.to_json()).unwrap();
        let back = CharImset::from_json(&serde_json::from_str(&j).unwrap(), ImsetMode::Restricted).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn essential_graph_covers_members(d in arb_dag(7)) {
        let e = essential_graph(&mec_of(&d)).unwrap();
        for (a, b) in d.arcs() {
            let lo_hi = (a.min(b), a.max(b));
            prop_assert!(e.arcs.contains(&(a, b)) || e.undirected.contains(&lo_hi));
        }
        prop_assert_eq!(e.arcs.len() + e.undirected.len(), d.num_arcs());
    }
}
