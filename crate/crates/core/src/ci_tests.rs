//! Fisher-z partial correlation tests and the stable PC skeleton.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::nodeset::NodeSet;
use crate::scoring::SufficientStats;

pub const DEFAULT_ALPHA: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CiDecision {
    pub i: usize,
    pub j: usize,
    pub cond: NodeSet,
    pub statistic: f64,
    pub p_value: f64,
    pub independent: bool,
}

/// Partial correlation of `i` and `j` given `cond`, from the inverse of the
/// covariance block on `{i, j} ∪ cond`.
pub fn partial_correlation(i: usize, j: usize, cond: NodeSet, stats: &SufficientStats) -> Result<f64> {
    let p = stats.p();
    if i == j || i >= p || j >= p || cond.contains(i) || cond.contains(j) || !cond.is_subset(NodeSet::full(p)) {
        return Err(Error::InvalidArgument(format!("bad test ({i}, {j} | {cond:?})")));
    }
    let mut idx = vec![i, j];
    idx.extend(cond.iter());
    let block = stats.block(&idx);
    let singular = || Error::SingularCovariance {
        node: i,
        collinear: {
            let mut v = idx.clone();
            v.sort();
            v
        },
    };
    let chol = block.cholesky().ok_or_else(singular)?;
    let k = chol.inverse();
    let d = k[(0, 0)] * k[(1, 1)];
    if !(d > 0.0) || !d.is_finite() {
        return Err(singular());
    }
    Ok((-k[(0, 1)] / d.sqrt()).clamp(-1.0, 1.0))
}

pub fn fisher_z_test(i: usize, j: usize, cond: NodeSet, stats: &SufficientStats, alpha: f64) -> Result<CiDecision> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let n = stats.n();
    if n <= cond.len() + 3 {
        return Err(Error::SampleTooSmall { n, cond: cond.len() });
    }
    let r = partial_correlation(i, j, cond, stats)?;
    let scale = ((n - cond.len() - 3) as f64).sqrt();
    let (z, p) = if r.abs() >= 1.0 {
        (f64::INFINITY.copysign(r), 0.0)
    } else {
        let z = scale * r.atanh();
        (z, erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
    };
    Ok(CiDecision {
        i,
        j,
        cond,
        statistic: z,
        p_value: p,
        independent: p > alpha,
    })
}

#[derive(Clone, Debug)]
pub struct PcResult {
    pub skeleton: UndirectedGraph,
    /// Separating set of each removed pair `(a, b)`, `a < b`.
    pub sepsets: BTreeMap<(usize, usize), NodeSet>,
    /// Level at which each removed pair was separated.
    pub removed_at: BTreeMap<(usize, usize), usize>,
    pub tests: usize,
}

/// First separating set of `(a, b)` drawn from the frozen adjacencies, trying
/// subsets of `adj(a) ∖ {b}` then `adj(b) ∖ {a}` in lexicographic order.
fn separate(
    a: usize,
    b: usize,
    level: usize,
    frozen: &[NodeSet],
    stats: &SufficientStats,
    alpha: f64,
) -> Result<(Option<NodeSet>, usize)> {
    let mut tests = 0;
    for (x, y) in [(a, b), (b, a)] {
        let pool = frozen[x].without(y);
        if pool.len() < level {
            continue;
        }
        for s in pool.subsets_by_size(Some(level)).into_iter().filter(|s| s.len() == level) {
            tests += 1;
            if fisher_z_test(a, b, s, stats, alpha)?.independent {
                return Ok((Some(s), tests));
            }
        }
    }
    Ok((None, tests))
}

/// Stable PC skeleton: at level `ℓ` every remaining edge is tested against
/// conditioning sets of size `ℓ` taken from adjacencies frozen at the start
/// of the level; removals are applied at the level boundary.
pub fn pc_skeleton_detailed(stats: &SufficientStats, alpha: f64) -> Result<PcResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let p = stats.p();
    let mut g = UndirectedGraph::complete(p);
    let mut sepsets = BTreeMap::new();
    let mut removed_at = BTreeMap::new();
    let mut tests = 0;
    let mut level = 0;
    loop {
        let frozen: Vec<NodeSet> = (0..p).map(|i| g.neighbors(i)).collect();
        let edges = g.edges();
        if !edges
            .iter()
            .any(|&(a, b)| frozen[a].len() > level || frozen[b].len() > level)
        {
            break;
        }
        if stats.n() <= level + 3 {
            log::warn!("stopping PC at level {level}: {} samples are too few", stats.n());
            break;
        }
        let results: Vec<Result<(Option<NodeSet>, usize)>> = edges
            .par_iter()
            .map(|&(a, b)| separate(a, b, level, &frozen, stats, alpha))
            .collect();
        for (&(a, b), r) in edges.iter().zip(results) {
            let (sep, t) = r?;
            tests += t;
            if let Some(s) = sep {
                g.remove_edge(a, b);
                sepsets.insert((a, b), s);
                removed_at.insert((a, b), level);
            }
        }
        level += 1;
    }
    Ok(PcResult {
        skeleton: g,
        sepsets,
        removed_at,
        tests,
    })
}

pub fn pc_skeleton(stats: &SufficientStats, alpha: f64) -> Result<UndirectedGraph> {
    Ok(pc_skeleton_detailed(stats, alpha)?.skeleton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn ident(p: usize) -> SufficientStats {
        SufficientStats::from_cov(1000, DVector::zeros(p), DMatrix::identity(p, p)).unwrap()
    }

    #[test]
    fn independent_under_identity() {
        let s = ident(4);
        let d = fisher_z_test(0, 1, NodeSet::from_nodes([2, 3]), &s, 0.01).unwrap();
        assert_eq!(d.statistic, 0.0);
        assert_eq!(d.p_value, 1.0);
        assert!(d.independent);
        assert_eq!(pc_skeleton(&s, 0.01).unwrap().num_edges(), 0);
    }

    #[test]
    fn strong_dependence() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.999, 0.999, 1.0]);
        let s = SufficientStats::from_cov(1000, DVector::zeros(2), cov).unwrap();
        let d = fisher_z_test(0, 1, NodeSet::EMPTY, &s, 0.01).unwrap();
        assert!(d.p_value < 1e-12 && !d.independent);
    }

    #[test]
    fn small_samples_rejected() {
        let s = SufficientStats::from_cov(4, DVector::zeros(3), DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            fisher_z_test(0, 1, NodeSet::singleton(2), &s, 0.05),
            Err(Error::SampleTooSmall { .. })
        ));
    }
}
