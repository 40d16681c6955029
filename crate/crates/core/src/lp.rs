//! Dense dictionary simplex with Bland's rule, generic over the scalar field.
//!
//! Solves `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`, so the origin is a
//! feasible basis and no phase one is needed.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar: Clone + Debug + PartialOrd + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Strictly positive beyond round-off.
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool {
        self.neg().is_pos()
    }
    fn is_nonzero(&self) -> bool {
        self.is_pos() || self.is_neg()
    }
    fn to_f64(&self) -> f64;
}

/// Round-off threshold for float pivoting decisions.
const F64_EPS: f64 = 1e-11;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_pos(&self) -> bool {
        *self > F64_EPS
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub value: T,
    pub x: Vec<T>,
    pub pivots: usize,
}

/// Maximize `c·x` over `{x ≥ 0 : A x ≤ b}`; requires `b ≥ 0`.
///
/// `a` is row-major with `m` rows of length `n`. Errors on an unbounded
/// objective or a negative right-hand side.
pub fn maximize<T: Scalar>(a: &[Vec<T>], b: &[T], c: &[T]) -> Result<LpSolution<T>> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Lp("dimension mismatch".into()));
    }
    if b.iter().any(|v| v.is_neg()) {
        return Err(Error::Lp("negative right-hand side".into()));
    }
    // Dictionary: basic_r = rhs[r] - sum_k tab[r][k] * nonbasic_k,
    // objective = z + sum_k cost[k] * nonbasic_k. Labels 0..n are structural,
    // n..n+m are slacks.
    let mut tab: Vec<Vec<T>> = a.to_vec();
    let mut rhs: Vec<T> = b.to_vec();
    let mut cost: Vec<T> = c.to_vec();
    let mut z = T::zero();
    let mut nonbasic: Vec<usize> = (0..n).collect();
    let mut basic: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0usize;

    loop {
        // Bland: smallest label among improving columns
        let enter = (0..n)
            .filter(|&k| cost[k].is_pos())
            .min_by_key(|&k| nonbasic[k]);
        let Some(e) = enter else { break };
        let mut leave: Option<(usize, T)> = None;
        for r in 0..m {
            if !tab[r][e].is_pos() {
                continue;
            }
            let ratio = rhs[r].div(&tab[r][e]);
            leave = match leave {
                None => Some((r, ratio)),
                Some((lr, lv)) => {
                    let d = ratio.sub(&lv);
                    if d.is_neg() || (!d.is_pos() && basic[r] < basic[lr]) {
                        Some((r, ratio))
                    } else {
                        Some((lr, lv))
                    }
                }
            };
        }
        let Some((l, _)) = leave else {
            return Err(Error::Lp("unbounded objective".into()));
        };
        pivot(&mut tab, &mut rhs, &mut cost, &mut z, l, e);
        std::mem::swap(&mut basic[l], &mut nonbasic[e]);
        pivots += 1;
    }

    let mut x = vec![T::zero(); n];
    for (r, &lab) in basic.iter().enumerate() {
        if lab < n {
            x[lab] = rhs[r].clone();
        }
    }
    Ok(LpSolution { value: z, x, pivots })
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], rhs: &mut [T], cost: &mut [T], z: &mut T, l: usize, e: usize) {
    let n = cost.len();
    let piv = tab[l][e].clone();
    // Solve row l for the entering variable.
    let inv = T::one().div(&piv);
    for k in 0..n {
        tab[l][k] = if k == e { inv.clone() } else { tab[l][k].div(&piv) };
    }
    rhs[l] = rhs[l].div(&piv);
    let row_l = tab[l].clone();
    let rhs_l = rhs[l].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r == l {
            continue;
        }
        let f = row[e].clone();
        if !f.is_nonzero() {
            if !matches!(f.partial_cmp(&T::zero()), Some(std::cmp::Ordering::Equal)) {
                row[e] = T::zero();
            }
            continue;
        }
        for k in 0..n {
            row[k] = if k == e {
                f.mul(&row_l[e]).neg()
            } else {
                row[k].sub(&f.mul(&row_l[k]))
            };
        }
        rhs[r] = rhs[r].sub(&f.mul(&rhs_l));
    }
    let f = cost[e].clone();
    for k in 0..n {
        cost[k] = if k == e {
            f.mul(&row_l[e]).neg()
        } else {
            cost[k].sub(&f.mul(&row_l[k]))
        };
    }
    *z = z.add(&f.mul(&rhs_l));
}

/// Rank by Gaussian elimination; exact for rationals.
pub fn rank<T: Scalar>(rows: &[Vec<T>]) -> usize {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let ncol = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for col in 0..ncol {
        let Some(piv) = (r..m.len()).find(|&i| m[i][col].is_nonzero()) else {
            continue;
        };
        m.swap(r, piv);
        let pv = m[r][col].clone();
        for i in r + 1..m.len() {
            if !m[i][col].is_nonzero() {
                continue;
            }
            let f = m[i][col].div(&pv);
            for k in col..ncol {
                let v = m[i][k].sub(&f.mul(&m[r][k]));
                m[i][k] = v;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

pub fn to_rational(v: i64) -> BigRational {
    BigRational::from_i64(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        to_rational(v)
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let s = maximize(&a, &[4.0, 12.0, 18.0], &[3.0, 5.0]).unwrap();
        assert!((s.value - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);

        let ar: Vec<Vec<BigRational>> = a.iter().map(|r| r.iter().map(|&v| q(v as i64)).collect()).collect();
        let s = maximize(&ar, &[q(4), q(12), q(18)], &[q(3), q(5)]).unwrap();
        assert_eq!(s.value, q(36));
    }

    #[test]
    fn unbounded_and_degenerate() {
        assert!(maximize(&[vec![1.0, -1.0]], &[1.0], &[0.0, 1.0]).is_err());
        // degenerate vertex at the origin; Bland's rule must terminate
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 0.0]];
        let s = maximize(&a, &[0.0, 0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ranks() {
        let m = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]];
        assert_eq!(rank(&m), 2);
        let id: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| (i == j) as i64 as f64).collect()).collect();
        assert_eq!(rank(&id), 4);
    }
}
