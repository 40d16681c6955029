use nalgebra::DMatrix;

use cimwalk::graph::Dag;
use cimwalk::scoring::{score_dag_uncached, SufficientStats};
use cimwalk::simulation::{assign_weights, random_dag, sample, seeded_rng, SemModel};

#[test]
fn mean_degree_matches_edge_probability() {
    let mut rng = seeded_rng(1);
    let draws = 10_000;
    let total: usize = (0..draws).map(|_| random_dag(8, 2.0, &mut rng).unwrap().num_arcs()).sum();
    let mean_degree = 2.0 * total as f64 / (draws as f64 * 8.0);
    assert!((mean_degree - 2.0).abs() < 0.1, "{mean_degree}");
}

#[test]
fn weight_distribution() {
    let mut rng = seeded_rng(2);
    let mut ws = Vec::new();
    while ws.len() < 10_000 {
        let d = random_dag(8, 7.0, &mut rng).unwrap();
        ws.extend(assign_weights(&d, &mut rng).weights.into_values());
    }
    let n = ws.len() as f64;
    let mean_abs = ws.iter().map(|w| w.abs()).sum::<f64>() / n;
    let pos = ws.iter().filter(|&&w| w > 0.0).count() as f64 / n;
    assert!((mean_abs - 0.625).abs() < 0.01, "{mean_abs}");
    assert!((pos - 0.5).abs() < 0.02, "{pos}");
}

#[test]
fn empty_model_has_identity_covariance() {
    let m = SemModel::new(Dag::empty(4), Default::default()).unwrap();
    let n = 10_000;
    let (_, s) = sample(&m, n, &mut seeded_rng(3)).unwrap();
    let tol = 3.0 * (2.0 / n as f64).sqrt();
    let diff = s.cov() - DMatrix::<f64>::identity(4, 4);
    assert!(diff.iter().all(|x| x.abs() < tol), "{diff}");
}

#[test]
fn chain_covariance() {
    let m = SemModel::new(Dag::from_arcs(2, &[(0, 1)]).unwrap(), [((0, 1), 0.8)].into()).unwrap();
    let (_, s) = sample(&m, 10_000, &mut seeded_rng(4)).unwrap();
    assert!((s.cov()[(0, 1)] - 0.8).abs() < 0.05);
}

#[test]
fn empirical_matches_population_covariance() {
    let mut rng = seeded_rng(5);
    let d = random_dag(6, 2.0, &mut rng).unwrap();
    let m = assign_weights(&d, &mut rng);
    let n = 10_000;
    let (_, s) = sample(&m, n, &mut rng).unwrap();
    let pop = m.population_covariance();
    for a in 0..6 {
        for b in 0..6 {
            // Var of a sample covariance entry is (s_aa s_bb + s_ab^2) / n.
            let sd = ((pop[(a, a)] * pop[(b, b)] + pop[(a, b)].powi(2)) / n as f64).sqrt();
            assert!((s.cov()[(a, b)] - pop[(a, b)]).abs() < 4.0 * sd, "({a},{b})");
        }
    }
}

#[test]
fn true_dag_beats_single_deletions_under_population_covariance() {
    let mut rng = seeded_rng(6);
    let mut checked = 0;
    while checked < 20 {
        let d = random_dag(6, 2.0, &mut rng).unwrap();
        if d.num_arcs() == 0 {
            continue;
        }
        let m = assign_weights(&d, &mut rng);
        let s = SufficientStats::from_cov(10_000, nalgebra::DVector::zeros(6), m.population_covariance()).unwrap();
        let base = score_dag_uncached(&d, &s).unwrap();
        for (a, b) in d.arcs() {
            let del = d.remove_arc(a, b).unwrap();
            assert!(base > score_dag_uncached(&del, &s).unwrap());
        }
        checked += 1;
    }
}

#[test]
fn seeds_reproduce() {
    let d = random_dag(5, 2.0, &mut seeded_rng(9)).unwrap();
    assert_eq!(d, random_dag(5, 2.0, &mut seeded_rng(9)).unwrap());
}
