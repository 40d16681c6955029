use cimwalk::graph::{mec_of, Dag, UndirectedGraph};
use cimwalk::polytope::{
    certify_edge, enumerate_mecs, enumerate_mecs_with_skeleton, face_objective, maximizers, verify_stab_equivalence,
    StabKind, LP_TOLERANCE,
};

#[test]
fn addition_on_three_node_path_is_certified() {
    let vs = enumerate_mecs(3).unwrap();
    let chain = vs.index_of(&mec_of(&Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap())).unwrap();
    let collider = vs.index_of(&mec_of(&Dag::from_arcs(3, &[(0, 1), (2, 1)]).unwrap())).unwrap();
    let cert = certify_edge(chain, collider, &vs).unwrap().expect("edge");
    assert!(cert.margin > LP_TOLERANCE);
    let (margin, tie) = cert.check(&vs);
    assert!(tie.abs() < 1e-9 && margin > LP_TOLERANCE);
    assert!(certify_edge(chain, chain, &vs).is_err());
}

#[test]
fn non_edge_has_no_certificate() {
    // Empty graph and complete graph on 3 nodes: their midpoint is also the
    // midpoint of two single-edge-pair vertices, so they do not span an edge.
    let vs = enumerate_mecs(3).unwrap();
    let empty = vs.index_of(&cimwalk::graph::Mec::empty(3)).unwrap();
    let full = vs.index_of(&mec_of(&Dag::low_to_high(&UndirectedGraph::complete(3)))).unwrap();
    assert!(certify_edge(empty, full, &vs).unwrap().is_none());
}

#[test]
fn face_objectives_select_sandwiched_skeletons() {
    let vs = enumerate_mecs(4).unwrap();
    let g = UndirectedGraph::cycle(4);
    let w = face_objective(&g, &g).unwrap();
    let got: Vec<usize> = maximizers(&vs, &w);
    let want: Vec<usize> = (0..vs.len()).filter(|&k| vs.mec(k).skeleton() == &g).collect();
    assert_eq!(got, want);
    assert_eq!(got.len(), enumerate_mecs_with_skeleton(&g).unwrap().len());

    let all = face_objective(&UndirectedGraph::empty(4), &UndirectedGraph::complete(4)).unwrap();
    assert_eq!(maximizers(&vs, &all).len(), vs.len());

    let sub = face_objective(&UndirectedGraph::empty(4), &g).unwrap();
    let want: Vec<usize> = (0..vs.len())
        .filter(|&k| vs.mec(k).skeleton().edges().iter().all(|&(a, b)| g.has_edge(a, b)))
        .collect();
    assert_eq!(maximizers(&vs, &sub), want);
    assert!(face_objective(&g, &UndirectedGraph::empty(4)).is_err());
}

#[test]
fn stab_paths() {
    let r = verify_stab_equivalence(StabKind::Path, 4).unwrap();
    assert_eq!((r.vertices, r.lp_edges), (3, 3));
    assert_eq!(r.additions + r.shifts + r.splits, 3);
    assert!(r.ok());
    assert!(verify_stab_equivalence(StabKind::Path, 6).unwrap().classification_match);
}

#[test]
fn four_cycle_misses_the_empty_stable_set() {
    let r = verify_stab_equivalence(StabKind::Cycle, 4).unwrap();
    assert_eq!(r.stable_sets, 7);
    assert_eq!(r.vertices, 6);
    assert!(r.bijection_nonempty && r.coordinates_match);
}
