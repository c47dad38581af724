//! Comonotone and independent couplings, Choquet expectations and orthant probabilities.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{DiscreteMarginal, JointDistribution, ProductSupport, DEFAULT_LATTICE_CAP};

/// Cumulative levels closer than this are treated as one breakpoint.
const LEVEL_TOL: f64 = 1e-12;

/// Inverse-CDF layering of probability vectors indexed like their supports.
///
/// Zero entries are allowed and never receive mass. Each vector is rescaled to sum to one.
pub(crate) fn comonotone_atoms(probs: &[Vec<f64>]) -> Vec<(Vec<usize>, f64)> {
    let cums: Vec<Vec<f64>> = probs
        .iter()
        .map(|p| {
            let total: f64 = p.iter().map(|v| v.max(0.0)).sum();
            let mut acc = 0.0;
            let mut c: Vec<f64> = p
                .iter()
                .map(|v| {
                    acc += v.max(0.0) / total;
                    acc
                })
                .collect();
            if let Some(last) = c.last_mut() {
                *last = 1.0;
            }
            c
        })
        .collect();
    let n = probs.len();
    let mut ptr = vec![0usize; n];
    let mut prev = 0.0;
    let mut out = Vec::new();
    loop {
        let level = (0..n).map(|i| cums[i][ptr[i]]).fold(f64::INFINITY, f64::min);
        let mass = level - prev;
        if mass > LEVEL_TOL {
            out.push((ptr.clone(), mass));
            prev = level;
        }
        if level >= 1.0 - LEVEL_TOL {
            break;
        }
        for i in 0..n {
            if cums[i][ptr[i]] <= level + LEVEL_TOL && ptr[i] + 1 < cums[i].len() {
                ptr[i] += 1;
            }
        }
    }
    // absorb the rounding residue into the last atom so the masses sum to one
    if let Some(last) = out.last_mut() {
        last.1 += 1.0 - prev;
    }
    out
}

fn check_marginals(marginals: &[DiscreteMarginal]) -> Result<ProductSupport> {
    if marginals.is_empty() {
        return Err(Error::Invalid("at least one marginal is required".into()));
    }
    let issues: Vec<String> = marginals
        .iter()
        .enumerate()
        .flat_map(|(i, m)| m.issues().into_iter().map(move |s| format!("marginal {i}: {s}")))
        .collect();
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(issues));
    }
    Ok(ProductSupport { dims: marginals.iter().map(|m| m.values.clone()).collect() })
}

/// The comonotone coupling: all coordinates driven by one uniform through their quantile
/// functions. Support is a chain with at most `Σ|Ξ_i| - N + 1` points.
pub fn comonotone_coupling(marginals: &[DiscreteMarginal]) -> Result<JointDistribution> {
    let support = check_marginals(marginals)?;
    let probs: Vec<Vec<f64>> = marginals.iter().map(|m| m.probs.clone()).collect();
    let mass: BTreeMap<Vec<usize>, f64> = comonotone_atoms(&probs).into_iter().collect();
    Ok(JointDistribution { support, mass })
}

/// The product coupling.
pub fn independent_coupling(marginals: &[DiscreteMarginal]) -> Result<JointDistribution> {
    let support = check_marginals(marginals)?;
    support.size_within(DEFAULT_LATTICE_CAP)?;
    let mass = support
        .points()
        .map(|p| {
            let pr = p.iter().enumerate().map(|(i, &k)| marginals[i].probs[k]).product();
            (p, pr)
        })
        .collect();
    Ok(JointDistribution { support, mass })
}

/// Expectation of `f` under the comonotone coupling (the Choquet integral of `f`).
pub fn choquet_expectation(f: impl Fn(&[f64]) -> f64, marginals: &[DiscreteMarginal]) -> Result<f64> {
    Ok(comonotone_coupling(marginals)?.expectation(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orthant {
    /// `P(ξ ≥ t)` componentwise.
    Upper,
    /// `P(ξ ≤ t)` componentwise.
    Lower,
}

/// Orthant probability at lattice index point `t`, with weak inequalities.
pub fn orthant_prob(joint: &JointDistribution, t: &[usize], direction: Orthant) -> Result<f64> {
    if !joint.support.contains(t) {
        return Err(Error::Invalid(format!("point {t:?} is not on the lattice")));
    }
    Ok(joint
        .mass
        .iter()
        .filter(|(p, _)| match direction {
            Orthant::Upper => p.iter().zip(t).all(|(a, b)| a >= b),
            Orthant::Lower => p.iter().zip(t).all(|(a, b)| a <= b),
        })
        .map(|(_, &m)| m)
        .sum())
}
