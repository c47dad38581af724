use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::types::{subsets_up_to, DiscreteMarginal, MomentBasis, MomentSpec, PiecewiseAffineObjective, ProductSupport};

/// Concordance multipliers indexed by subset size minus one (the first entry is unused).
pub const DEFAULT_ALPHA: [f64; 8] = [1.0, 0.165, 0.4, 1.2, 1.11, 1.13, 1.15, 1.16];
/// Common support of every marginal in the moment experiments.
pub const MOMENT_SUPPORT: [f64; 10] = [-5.0, -2.0, 0.0, 3.0, 6.0, 8.0, 11.0, 14.0, 17.0, 20.0];
/// Number of pieces in the moment experiments.
pub const MOMENT_PIECES: usize = 3;

/// Random Boolean instance: `p_i ~ U(0, a)` and `N` pieces with `a_k ~ U[-1, 1]^N`,
/// `b_k ~ U[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PodInstance {
    pub seed: u64,
    pub p: Vec<f64>,
    pub objective: PiecewiseAffineObjective,
}

pub fn gen_pod_instance(seed: u64, n: usize, a: f64) -> Result<PodInstance> {
    if n == 0 || !(a > 0.0 && a <= 1.0) {
        return Err(Error::Invalid(format!("need N ≥ 1 and 0 < a ≤ 1, got N = {n}, a = {a}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: Vec<f64> = (0..n)
        .map(|_| loop {
            let v = rng.random_range(0.0..a);
            if v > 0.0 {
                break v;
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        rows.push((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
        b.push(rng.random_range(-1.0..=1.0));
    }
    Ok(PodInstance { seed, p, objective: PiecewiseAffineObjective::new(rows, b)? })
}

/// Targets `q_I` for `2 ≤ |I| ≤ M`: `q_ij = α_2 min(p_i, p_j)` and, for larger sets,
/// `α_|I|` times the largest target over subsets one element smaller, capped at `min_{i∈I} p_i`.
/// `alpha[s - 1]` is `α_s`.
pub fn gen_concordance_targets(p: &[f64], m: usize, alpha: &[f64]) -> Result<BTreeMap<Vec<usize>, f64>> {
    let m = m.min(p.len());
    if m >= 2 && alpha.len() < m {
        return Err(Error::Invalid(format!("alpha has {} entries, need {m}", alpha.len())));
    }
    let mut q: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for set in subsets_up_to(p.len(), m) {
        let cap = set.iter().map(|&i| p[i]).fold(f64::INFINITY, f64::min);
        let base = if set.len() == 2 {
            cap
        } else {
            (0..set.len())
                .map(|drop| {
                    let sub: Vec<usize> = set.iter().enumerate().filter(|&(e, _)| e != drop).map(|(_, &i)| i).collect();
                    q[&sub]
                })
                .fold(0.0, f64::max)
        };
        q.insert(set.clone(), (alpha[set.len() - 1] * base).min(cap));
    }
    Ok(q)
}

/// Random moment instance: Dirichlet(2, ..., 2) marginals on [`MOMENT_SUPPORT`] and
/// [`MOMENT_PIECES`] pieces with `a_k ~ U[-5, 5]^N`, `b_k ~ U[-2, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentInstance {
    pub seed: u64,
    pub marginals: Vec<DiscreteMarginal>,
    pub objective: PiecewiseAffineObjective,
}

pub fn gen_moment_instance(seed: u64, n: usize) -> Result<MomentInstance> {
    if n == 0 {
        return Err(Error::Invalid("need N ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(2.0, 1.0).expect("valid shape and scale");
    let marginals = (0..n)
        .map(|_| {
            let w: Vec<f64> = MOMENT_SUPPORT.iter().map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = w.iter().sum();
            DiscreteMarginal::new(MOMENT_SUPPORT.to_vec(), w.iter().map(|x| x / total).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(MOMENT_PIECES);
    let mut b = Vec::with_capacity(MOMENT_PIECES);
    for _ in 0..MOMENT_PIECES {
        rows.push((0..n).map(|_| rng.random_range(-5.0..=5.0)).collect());
        b.push(rng.random_range(-2.0..=2.0));
    }
    Ok(MomentInstance { seed, marginals, objective: PiecewiseAffineObjective::new(rows, b)? })
}

/// Polynomials of degree `1..=L` orthonormal under the uniform weight on `values`, as tables
/// over `values`. Degrees at or above `|values|` add nothing and are dropped.
pub fn orthonormal_basis(values: &[f64], l: usize) -> Vec<Vec<f64>> {
    let n = values.len();
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mid = 0.5 * (lo + hi);
    let half = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let z: Vec<f64> = values.iter().map(|v| (v - mid) / half).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n as f64;
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for _ in 0..l.min(n.saturating_sub(1)) {
        let last = basis.last().expect("basis starts with the constant");
        let mut next: Vec<f64> = last.iter().zip(&z).map(|(q, x)| q * x).collect();
        // Two passes of Gram-Schmidt keep the tables orthonormal to rounding.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&next, q);
                next.iter_mut().zip(q).for_each(|(x, qv)| *x -= c * qv);
            }
        }
        let norm = dot(&next, &next).sqrt();
        next.iter_mut().for_each(|x| *x /= norm);
        basis.push(next);
    }
    basis.remove(0);
    basis
}

impl MomentInstance {
    /// Moments of order `1..=L` of every marginal in the orthonormal basis, with the
    /// cross-moment bounds `Q_ij = E[ξ_i] E[ξ_j]` on all pairs.
    pub fn spec(&self, l: usize) -> MomentSpec {
        let tables: Vec<Vec<Vec<f64>>> = self.marginals.iter().map(|m| orthonormal_basis(&m.values, l)).collect();
        let moments = self
            .marginals
            .iter()
            .zip(&tables)
            .map(|(m, t)| t.iter().map(|h| h.iter().zip(&m.probs).map(|(hv, p)| hv * p).sum()).collect())
            .collect();
        let n = self.marginals.len();
        let means: Vec<f64> = self.marginals.iter().map(|m| m.mean()).collect();
        let cross = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| ((i, j), means[i] * means[j])).collect();
        MomentSpec {
            support: ProductSupport { dims: self.marginals.iter().map(|m| m.values.clone()).collect() },
            moments,
            basis: MomentBasis::Tables(tables),
            cross,
        }
    }
}
