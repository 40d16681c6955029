//! Linear Gaussian SEMs over random Erdős–Rényi DAGs.
//!
//! Every random draw comes from [`ChaCha8Rng`] seeded with [`seeded_rng`], so
//! a seed reproduces the same graph, weights and samples on every platform.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{topological_order, Dag};
use crate::scoring::SufficientStats;

pub const WEIGHT_MIN: f64 = 0.25;
pub const WEIGHT_MAX: f64 = 1.0;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemModel {
    pub dag: Dag,
    pub weights: BTreeMap<(usize, usize), f64>,
    pub noise_variance: Vec<f64>,
}

impl SemModel {
    pub fn new(dag: Dag, weights: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        let arcs: Vec<(usize, usize)> = dag.arcs();
        if weights.keys().copied().collect::<Vec<_>>() != arcs {
            return Err(Error::InvalidArgument("weights must be keyed exactly by the arcs".into()));
        }
        let p = dag.p();
        Ok(SemModel {
            dag,
            weights,
            noise_variance: vec![1.0; p],
        })
    }

    /// Weighted adjacency `W[k][i] = w_{k,i}`.
    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let p = self.dag.p();
        let mut w = DMatrix::zeros(p, p);
        for (&(k, i), &v) in &self.weights {
            w[(k, i)] = v;
        }
        w
    }

    /// `(I − W)^{-T} Ω (I − W)^{-1}` with `Ω` the noise variances.
    pub fn population_covariance(&self) -> DMatrix<f64> {
        let p = self.dag.p();
        let a = (DMatrix::identity(p, p) - self.weight_matrix())
            .try_inverse()
            .expect("I - W is unitriangular up to permutation");
        let omega = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.noise_variance.clone()));
        a.transpose() * omega * a
    }

    pub fn truth(&self) -> Truth {
        Truth {
            p: self.dag.p(),
            arcs: self
                .weights
                .iter()
                .map(|(&(from, to), &weight)| WeightedArc { from, to, weight })
                .collect(),
            noise_variance: self.noise_variance.clone(),
        }
    }

    pub fn from_truth(t: &Truth) -> Result<Self> {
        let arcs: Vec<(usize, usize)> = t.arcs.iter().map(|a| (a.from, a.to)).collect();
        let dag = Dag::from_arcs(t.p, &arcs)?;
        let weights = t.arcs.iter().map(|a| ((a.from, a.to), a.weight)).collect();
        let mut m = SemModel::new(dag, weights)?;
        if t.noise_variance.len() == t.p {
            m.noise_variance = t.noise_variance.clone();
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedArc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Ground-truth JSON: arcs with weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub p: usize,
    pub arcs: Vec<WeightedArc>,
    #[serde(default)]
    pub noise_variance: Vec<f64>,
}

/// Each pair is an edge with probability `d / (p − 1)`, oriented along a
/// uniformly random linear order.
pub fn random_dag<R: Rng + ?Sized>(p: usize, d: f64, rng: &mut R) -> Result<Dag> {
    let max = p.saturating_sub(1) as f64;
    if !(d >= 0.0 && d <= max) {
        return Err(Error::InvalidArgument(format!("expected degree {d} outside [0, {max}]")));
    }
    let prob = if p > 1 { d / max } else { 0.0 };
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let mut arcs = Vec::new();
    for a in 0..p {
        for b in a + 1..p {
            if rng.random::<f64>() < prob {
                arcs.push((order[a], order[b]));
            }
        }
    }
    Dag::from_arcs(p, &arcs)
}

/// Magnitudes uniform on `[0.25, 1]`, signs fair.
pub fn assign_weights<R: Rng + ?Sized>(dag: &Dag, rng: &mut R) -> SemModel {
    let weights = dag
        .arcs()
        .into_iter()
        .map(|a| {
            let m = rng.random_range(WEIGHT_MIN..=WEIGHT_MAX);
            (a, if rng.random::<bool>() { m } else { -m })
        })
        .collect();
    SemModel::new(dag.clone(), weights).expect("weights keyed by arcs")
}

/// `n` rows of `X_i = ε_i + Σ_k w_{k,i} X_k`, filled in topological order.
pub fn sample<R: Rng + ?Sized>(model: &SemModel, n: usize, rng: &mut R) -> Result<(DMatrix<f64>, SufficientStats)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let p = model.dag.p();
    let order = topological_order(&model.dag);
    let parents: Vec<Vec<(usize, f64)>> = (0..p)
        .map(|i| {
            model
                .dag
                .parents(i)
                .iter()
                .map(|k| (k, model.weights[&(k, i)]))
                .collect()
        })
        .collect();
    let sd: Vec<f64> = model.noise_variance.iter().map(|v| v.sqrt()).collect();
    let mut data = DMatrix::zeros(n, p);
    let mut row = vec![0.0; p];
    for r in 0..n {
        for &i in &order {
            let e: f64 = rng.sample(StandardNormal);
            row[i] = sd[i] * e + parents[i].iter().map(|&(k, w)| w * row[k]).sum::<f64>();
        }
        for i in 0..p {
            data[(r, i)] = row[i];
        }
    }
    let stats = SufficientStats::from_data(&data)?;
    Ok((data, stats))
}

pub fn write_csv<W: std::io::Write>(data: &DMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((0..data.ncols()).map(|j| format!("x{j}")))?;
    for r in 0..data.nrows() {
        w.write_record((0..data.ncols()).map(|j| format!("{:?}", data[(r, j)])))?;
    }
    w.flush()?;
    Ok(())
}
