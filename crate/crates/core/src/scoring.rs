//! Gaussian BIC with `|pa| + 1` parameters per node and `λ = log(n) / 2`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{consistent_extension, Dag, Mec};
use crate::moves::{apply_move, Move};
use crate::nodeset::NodeSet;

/// Residual variances at or below this fraction of the node variance are
/// treated as exact collinearity.
pub const COLLINEAR_RATIO: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SufficientStats {
    n: usize,
    mean: DVector<f64>,
    /// Maximum-likelihood covariance (divisor `n`).
    cov: DMatrix<f64>,
}

impl SufficientStats {
    pub fn from_cov(n: usize, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let p = cov.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        if cov.ncols() != p || mean.len() != p {
            return Err(Error::InvalidArgument("covariance must be square and match the mean".into()));
        }
        for i in 0..p {
            if !(cov[(i, i)] >= 0.0) {
                return Err(Error::InvalidArgument(format!("negative variance at node {i}")));
            }
            for j in 0..i {
                let (a, b) = (cov[(i, j)], cov[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidArgument(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SufficientStats { n, mean, cov })
    }

    /// Rows are samples, columns variables.
    pub fn from_data(data: &DMatrix<f64>) -> Result<Self> {
        let n = data.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("data contains non-finite values".into()));
        }
        let mean = DVector::from_iterator(data.ncols(), data.column_iter().map(|c| c.sum() / n as f64));
        let mut centered = data.clone();
        for (j, mut col) in centered.column_iter_mut().enumerate() {
            col.add_scalar_mut(-mean[j]);
        }
        let mut cov = centered.transpose() * &centered / n as f64;
        // exact symmetry
        for i in 0..cov.nrows() {
            for j in 0..i {
                cov[(j, i)] = cov[(i, j)];
            }
        }
        SufficientStats::from_cov(n, mean, cov)
    }

    pub fn from_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_data(&read_csv_matrix(path)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.cov.nrows()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub(crate) fn block(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.cov[(idx[a], idx[b])])
    }
}

/// Numeric CSV, one row per sample. A first row that does not parse as
/// numbers is taken as a header.
pub fn read_csv_matrix<P: AsRef<Path>>(path: P) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line: line + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    let p = rows.first().map_or(0, Vec::len);
    if let Some((k, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
        return Err(Error::Parse {
            line: k + 1,
            msg: format!("expected {p} columns"),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

/// Residual variance of `node` regressed on `parents`, via the Schur complement.
pub fn residual_variance(node: usize, parents: NodeSet, stats: &SufficientStats) -> Result<f64> {
    let p = stats.p();
    if node >= p || parents.contains(node) || !parents.is_subset(NodeSet::full(p)) {
        return Err(Error::InvalidArgument(format!("bad parent set {parents:?} for node {node}")));
    }
    let vii = stats.cov[(node, node)];
    let collinear = || {
        let mut v = parents.to_vec();
        v.push(node);
        v.sort();
        Error::SingularCovariance { node, collinear: v }
    };
    if vii <= 0.0 {
        return Err(Error::SingularCovariance { node, collinear: vec![node] });
    }
    if parents.is_empty() {
        return Ok(vii);
    }
    let pa = parents.to_vec();
    let block = stats.block(&pa);
    let Some(chol) = block.clone().cholesky() else {
        return Err(Error::SingularCovariance {
            node,
            collinear: minimal_singular_prefix(&pa, stats),
        });
    };
    let c = DVector::from_iterator(pa.len(), pa.iter().map(|&k| stats.cov[(k, node)]));
    let beta = chol.solve(&c);
    let s2 = vii - c.dot(&beta);
    if s2 <= COLLINEAR_RATIO * vii {
        return Err(collinear());
    }
    Ok(s2)
}

fn minimal_singular_prefix(pa: &[usize], stats: &SufficientStats) -> Vec<usize> {
    for k in 1..=pa.len() {
        if stats.block(&pa[..k]).cholesky().is_none() {
            return pa[..k].to_vec();
        }
    }
    pa.to_vec()
}

pub fn local_bic(node: usize, parents: NodeSet, stats: &SufficientStats) -> Result<f64> {
    let s2 = residual_variance(node, parents, stats)?;
    let n = stats.n as f64;
    let lambda = n.ln() / 2.0;
    Ok(-(n / 2.0) * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0) - lambda * (parents.len() as f64 + 1.0))
}

/// Memo of local scores keyed by `(node, parent set)`.
#[derive(Debug, Default)]
pub struct LocalScoreCache {
    map: RwLock<HashMap<(usize, NodeSet), f64>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl LocalScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn local(&self, node: usize, parents: NodeSet, stats: &SufficientStats) -> Result<f64> {
        if let Some(&v) = self.map.read().expect("cache lock").get(&(node, parents)) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = local_bic(node, parents, stats)?;
        self.map.write().expect("cache lock").insert((node, parents), v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

/// Sum of local scores, added left to right by node index.
pub fn score_dag(dag: &Dag, stats: &SufficientStats, cache: &LocalScoreCache) -> Result<f64> {
    check_dims(dag.p(), stats)?;
    let mut total = 0.0;
    for i in 0..dag.p() {
        total += cache.local(i, dag.parents(i), stats)?;
    }
    Ok(total)
}

/// [`score_dag`] without memoization.
pub fn score_dag_uncached(dag: &Dag, stats: &SufficientStats) -> Result<f64> {
    check_dims(dag.p(), stats)?;
    let mut total = 0.0;
    for i in 0..dag.p() {
        total += local_bic(i, dag.parents(i), stats)?;
    }
    Ok(total)
}

fn check_dims(p: usize, stats: &SufficientStats) -> Result<()> {
    if p != stats.p() {
        return Err(Error::InvalidArgument(format!("graph has {p} nodes but data has {}", stats.p())));
    }
    Ok(())
}

pub fn score_mec(mec: &Mec, stats: &SufficientStats, cache: &LocalScoreCache) -> Result<f64> {
    let d = consistent_extension(mec).ok_or(Error::NotRealizable)?;
    score_dag(&d, stats, cache)
}

/// Score change between two DAGs, rescoring only nodes whose parents differ.
pub(crate) fn score_delta_dags(a: &Dag, b: &Dag, stats: &SufficientStats, cache: &LocalScoreCache) -> Result<f64> {
    let mut d = 0.0;
    for i in 0..a.p() {
        if a.parents(i) != b.parents(i) {
            d += cache.local(i, b.parents(i), stats)? - cache.local(i, a.parents(i), stats)?;
        }
    }
    Ok(d)
}

/// `score_mec(target) − score_mec(source)` for the move applied at `source`.
pub fn score_delta(source: &Mec, mv: &Move, stats: &SufficientStats, cache: &LocalScoreCache) -> Result<f64> {
    let target = apply_move(source, mv)?;
    let a = consistent_extension(source).ok_or(Error::NotRealizable)?;
    let b = consistent_extension(&target).ok_or(Error::NotRealizable)?;
    check_dims(a.p(), stats)?;
    score_delta_dags(&a, &b, stats, cache)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_identity(p: usize, n: usize) -> SufficientStats {
        SufficientStats::from_cov(n, DVector::zeros(p), DMatrix::identity(p, p)).unwrap()
    }

    #[test]
    fn parent_free_value() {
        let s = stats_identity(1, 100);
        let v = local_bic(0, NodeSet::EMPTY, &s).unwrap();
        let expect = -50.0 * ((2.0 * std::f64::consts::PI).ln() + 1.0) - (100f64).ln() / 2.0;
        assert!((v - expect).abs() < 1e-12);
        assert!((v + 144.1964).abs() < 1e-3);
    }

    #[test]
    fn irrelevant_parent_costs_lambda() {
        let s = stats_identity(2, 100);
        let a = local_bic(0, NodeSet::EMPTY, &s).unwrap();
        let b = local_bic(0, NodeSet::singleton(1), &s).unwrap();
        assert!((a - b - (100f64).ln() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_parent_errors() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = SufficientStats::from_cov(10, DVector::zeros(2), cov).unwrap();
        assert!(matches!(
            local_bic(0, NodeSet::singleton(1), &s),
            Err(Error::SingularCovariance { .. })
        ));
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let s = SufficientStats::from_cov(10, DVector::zeros(3), cov).unwrap();
        match local_bic(2, NodeSet::from_nodes([0, 1]), &s) {
            Err(Error::SingularCovariance { collinear, .. }) => assert_eq!(collinear, vec![0, 1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stats_from_data() {
        let d = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let s = SufficientStats::from_data(&d).unwrap();
        assert_eq!(s.n(), 4);
        assert!((s.mean()[0] - 4.0).abs() < 1e-12);
        assert!((s.cov()[(0, 0)] - 5.0).abs() < 1e-12);
        assert!((s.cov()[(0, 1)] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn cache_matches_direct() {
        let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.3, 0.5, 1.0, 0.2, 0.3, 0.2, 1.5]);
        let s = SufficientStats::from_cov(50, DVector::zeros(3), cov).unwrap();
        let cache = LocalScoreCache::new();
        let dag = Dag::from_arcs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let a = score_dag(&dag, &s, &cache).unwrap();
        let b = score_dag(&dag, &s, &cache).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(a.to_bits(), score_dag_uncached(&dag, &s).unwrap().to_bits());
        assert_eq!(cache.hits(), 3);
    }
}
