//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

pub mod exact_lp;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sharpbound::{
    comonotone_coupling, independent_coupling, AmbiguitySpec, BooleanHigherOrder, ConstraintKind, DiscreteMarginal, GenericSubmodular,
    JointDistribution, MomentSpec, PairPoint, PiecewiseAffineObjective, PodBivariate, ProductSupport, SubmodularConstraint,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Marginal on `len` distinct sorted integer values with every mass at least 0.05.
pub fn marginal(rng: &mut impl Rng, len: usize) -> DiscreteMarginal {
    let mut pool: Vec<i32> = (-3..=5).collect();
    pool.shuffle(rng);
    let mut values: Vec<f64> = pool[..len].iter().map(|&v| f64::from(v)).collect();
    values.sort_by(f64::total_cmp);
    let w: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    DiscreteMarginal::new(values, w.iter().map(|v| v / total).collect()).expect("valid marginal")
}

pub fn marginals(rng: &mut impl Rng, n: usize, max_len: usize) -> Vec<DiscreteMarginal> {
    (0..n)
        .map(|_| {
            let len = rng.random_range(2..=max_len);
            marginal(rng, len)
        })
        .collect()
}

pub fn objective(rng: &mut impl Rng, n: usize, max_k: usize) -> PiecewiseAffineObjective {
    let k = rng.random_range(1..=max_k);
    let a = (0..k).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let b = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    PiecewiseAffineObjective::new(a, b).expect("valid objective")
}

/// `θ` comonotone plus `1 - θ` independent: it dominates the independent coupling in every
/// positive-dependence order, so targets read off it are attainable.
pub fn reference_joint(marginals: &[DiscreteMarginal], theta: f64) -> JointDistribution {
    let co = comonotone_coupling(marginals).expect("coupling");
    let ind = independent_coupling(marginals).expect("coupling");
    let mut mass: BTreeMap<Vec<usize>, f64> = ind.mass.iter().map(|(p, &m)| (p.clone(), (1.0 - theta) * m)).collect();
    for (p, m) in &co.mass {
        *mass.entry(p.clone()).or_insert(0.0) += theta * m;
    }
    JointDistribution::new(ind.support.clone(), mass).expect("mixture")
}

fn upper_orthant(joint: &JointDistribution, i: usize, j: usize, u: usize, w: usize) -> f64 {
    joint.mass.iter().filter(|(p, _)| p[i] >= u && p[j] >= w).map(|(_, m)| m).sum()
}

/// Bivariate-tail set: the full POD grid, or random points with targets below a mixture
/// of comonotone and independent couplings.
pub fn pod_spec(rng: &mut impl Rng, n: usize, max_len: usize) -> PodBivariate {
    let m = marginals(rng, n, max_len);
    if rng.random_bool(0.5) {
        return PodBivariate::pod(m);
    }
    let reference = reference_joint(&m, rng.random_range(0.0..1.0));
    let mut targets = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            for u in 0..m[i].len() {
                for w in 0..m[j].len() {
                    if rng.random_bool(0.6) {
                        let t = upper_orthant(&reference, i, j, u, w) * rng.random_range(0.8..=1.0);
                        targets.insert(PairPoint { i, j, u, w }, t);
                    }
                }
            }
        }
    }
    PodBivariate { marginals: m, targets: Some(targets) }
}

/// Boolean set of order `m` whose targets lie between the product and the comonotone value.
pub fn boolean_spec(rng: &mut impl Rng, n: usize, m: usize) -> BooleanHigherOrder {
    let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
    let mut spec = BooleanHigherOrder::new(p.clone(), m);
    if rng.random_bool(0.5) {
        let theta = rng.random_range(0.0..1.0);
        for set in sharpbound::subsets_up_to(n, m) {
            let prod: f64 = set.iter().map(|&i| p[i]).product();
            let min = set.iter().map(|&i| p[i]).fold(1.0, f64::min);
            spec.q.insert(set, prod + theta * rng.random_range(0.0..=1.0) * (min - prod));
        }
    }
    spec
}

/// Moments of degree up to `l` and cross moments on random pairs, all read off a random
/// joint distribution so the set is nonempty.
pub fn moment_spec(rng: &mut impl Rng, n: usize, max_len: usize, l: usize) -> MomentSpec {
    let dims: Vec<Vec<f64>> = marginals(rng, n, max_len).into_iter().map(|m| m.values).collect();
    let support = ProductSupport::new(dims).expect("support");
    let points: Vec<Vec<usize>> = support.points().collect();
    let mut mass = BTreeMap::new();
    for p in points {
        if rng.random_bool(0.5) {
            mass.insert(p, rng.random_range(0.0..1.0));
        }
    }
    if mass.is_empty() {
        mass.insert(support.min_point(), 1.0);
    }
    let total: f64 = mass.values().sum();
    mass.values_mut().for_each(|v| *v /= total);
    let joint = JointDistribution::new(support, mass).expect("joint");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.random_bool(0.6)).collect();
    let mut spec = MomentSpec::from_distribution(&joint, l, &pairs);
    // Loosen the cross bounds a little so that not every one is tight.
    for v in spec.cross.values_mut() {
        *v -= rng.random_range(0.0..0.5);
    }
    spec
}

/// Fréchet set plus up to `max_extra` submodular constraints whose levels hold under a
/// reference coupling.
pub fn generic_spec(rng: &mut impl Rng, n: usize, max_len: usize, max_extra: usize) -> GenericSubmodular {
    let m = marginals(rng, n, max_len);
    let reference = reference_joint(&m, rng.random_range(0.0..1.0));
    let support = reference.support.clone();
    let mut spec = GenericSubmodular::frechet(&m);
    for _ in 0..rng.random_range(0..=max_extra) {
        let i = rng.random_range(0..n - 1);
        let j = rng.random_range(i + 1..n);
        let kind = match rng.random_range(0..4) {
            0 => ConstraintKind::NegProduct { i, j },
            1 => ConstraintKind::NegUpperOrthant { i, j, ti: *m[i].values.choose(rng).unwrap(), tj: *m[j].values.choose(rng).unwrap() },
            2 => {
                // a concave function of a nonnegative combination is submodular
                let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
                ConstraintKind::Custom(Arc::new(move |x: &[f64]| -w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().powi(2)))
            }
            _ => {
                let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.2)).collect();
                let f = |x: &[f64]| -> f64 { -(w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).exp() };
                ConstraintKind::Table(support.points().map(|p| f(&support.values(&p))).collect())
            }
        };
        let f = kind.oracle(&support);
        let level = reference.expectation(|x| f(x));
        spec = spec.with_constraint(SubmodularConstraint::new(kind, level + rng.random_range(0.0..0.05)));
    }
    spec
}

/// The ambiguity families compared against the exponential LP, with their objectives.
pub fn oracle_instances(per_family: usize) -> Vec<(AmbiguitySpec, PiecewiseAffineObjective)> {
    let mut out = Vec::new();
    for seed in 0..per_family as u64 {
        let mut r = rng(seed);
        let n = r.random_range(2..=4);
        out.push((AmbiguitySpec::PodBivariate(pod_spec(&mut r, n, 3)), objective(&mut r, n, 4)));
    }
    for seed in 0..per_family as u64 {
        let mut r = rng(1 << 20 | seed);
        let m = 1 + (seed as usize % 3);
        let n = r.random_range(m.max(2)..=4);
        out.push((AmbiguitySpec::BooleanHigherOrder(boolean_spec(&mut r, n, m)), objective(&mut r, n, 4)));
    }
    for seed in 0..per_family as u64 {
        let mut r = rng(2 << 20 | seed);
        let l = 1 + (seed as usize % 3);
        let n = r.random_range(2..=4);
        out.push((AmbiguitySpec::Moment(moment_spec(&mut r, n, 3, l)), objective(&mut r, n, 4)));
    }
    out
}
