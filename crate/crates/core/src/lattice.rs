//! Lattice algebra, submodularity checks and brute-force submodular minimization.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::types::{Oracle, ProductSupport, DEFAULT_LATTICE_CAP};

/// Absolute tolerance in the submodular inequality.
pub const SUBMODULAR_TOL: f64 = 1e-9;

/// Lattices up to this size are checked over all pairs; larger ones use the equivalent
/// two-coordinate neighbour condition.
const PAIRWISE_LIMIT: usize = 4096;

/// A function on a product lattice.
#[derive(Clone)]
pub struct LatticeFunction {
    pub support: ProductSupport,
    pub eval: Oracle,
}

impl std::fmt::Debug for LatticeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatticeFunction").field("support", &self.support).finish_non_exhaustive()
    }
}

impl LatticeFunction {
    pub fn new(support: ProductSupport, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        LatticeFunction { support, eval: Arc::new(f) }
    }

    pub fn from_oracle(support: ProductSupport, eval: Oracle) -> Self {
        LatticeFunction { support, eval }
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        (self.eval)(&self.support.values(idx))
    }

    /// `-f`; supermodularity of `f` is submodularity of the negation.
    pub fn negated(&self) -> LatticeFunction {
        let f = self.eval.clone();
        LatticeFunction::new(self.support.clone(), move |x| -f(x))
    }

    /// Values at every lattice point in enumeration order.
    pub fn table(&self, cap: usize) -> Result<Vec<f64>> {
        self.support.size_within(cap)?;
        Ok(self.support.points().map(|p| self.at(&p)).collect())
    }
}

/// Componentwise minimum and maximum.
pub fn meet_join<T: PartialOrd + Copy>(xi: &[T], chi: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if xi.len() != chi.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), got: chi.len() });
    }
    let meet = xi.iter().zip(chi).map(|(&a, &b)| if b < a { b } else { a }).collect();
    let join = xi.iter().zip(chi).map(|(&a, &b)| if b > a { b } else { a }).collect();
    Ok((meet, join))
}

/// Checks `f(ξ) + f(χ) ≥ f(ξ∧χ) + f(ξ∨χ) - 1e-9` on the whole lattice.
pub fn verify_submodular(f: &LatticeFunction) -> Result<bool> {
    verify_submodular_with_cap(f, DEFAULT_LATTICE_CAP)
}

pub fn verify_supermodular(f: &LatticeFunction) -> Result<bool> {
    verify_submodular(&f.negated())
}

pub fn verify_submodular_with_cap(f: &LatticeFunction, cap: usize) -> Result<bool> {
    let s = &f.support;
    let size = s.size_within(cap)?;
    let table = f.table(cap)?;
    let points: Vec<Vec<usize>> = s.points().collect();
    if size <= PAIRWISE_LIMIT {
        for a in 0..size {
            for b in a + 1..size {
                let (m, j) = meet_join(&points[a], &points[b])?;
                let lhs = table[a] + table[b];
                let rhs = table[s.linear_index(&m)] + table[s.linear_index(&j)];
                if lhs < rhs - SUBMODULAR_TOL {
                    return Ok(false);
                }
            }
        }
        return Ok(true);
    }
    // On a product of chains, submodularity is equivalent to the inequality on every
    // unit square spanned by two coordinates.
    let n = s.n();
    for (a, p) in points.iter().enumerate() {
        for i in 0..n {
            if p[i] + 1 >= s.dim_len(i) {
                continue;
            }
            for j in i + 1..n {
                if p[j] + 1 >= s.dim_len(j) {
                    continue;
                }
                let mut pi = p.clone();
                pi[i] += 1;
                let mut pj = p.clone();
                pj[j] += 1;
                let mut pij = pi.clone();
                pij[j] += 1;
                let lhs = table[s.linear_index(&pi)] + table[s.linear_index(&pj)];
                let rhs = table[a] + table[s.linear_index(&pij)];
                if lhs < rhs - SUBMODULAR_TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Exhaustive minimizer; ties go to the lexicographically smallest index point.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimizer {
    pub point: Vec<usize>,
    pub values: Vec<f64>,
    pub value: f64,
}

pub fn minimize_submodular(f: &LatticeFunction) -> Result<Minimizer> {
    minimize_submodular_with_cap(f, DEFAULT_LATTICE_CAP)
}

pub fn minimize_submodular_with_cap(f: &LatticeFunction, cap: usize) -> Result<Minimizer> {
    f.support.size_within(cap)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for p in f.support.points() {
        let v = f.at(&p);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((p, v));
        }
    }
    let (point, value) = best.expect("lattice is nonempty");
    Ok(Minimizer { values: f.support.values(&point), point, value })
}

/// Position and value of the smallest entry of a lattice table (first on ties).
pub(crate) fn argmin_table(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, v) in values.enumerate() {
        if v < best.1 {
            best = (k, v);
        }
    }
    best
}
