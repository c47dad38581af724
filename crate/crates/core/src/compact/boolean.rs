use std::collections::BTreeMap;

use sharpbound_lp::{LpModel, RowSense, Sense, Var};

use super::pod::check_inputs;
use super::{bound, solve_certified, CompactSolution};
use crate::error::{Error, Result};
use crate::genbound::BoundResult;
use crate::types::{AmbiguitySpec, BooleanHigherOrder, PiecewiseAffineObjective};

/// Cap on the number of pieces produced by [`expand_rank_objective`].
pub const MAX_PIECES: usize = 100_000;

struct Layout {
    lambda: Vec<Var>,
    /// `[i][k]`
    gamma: Vec<Vec<Var>>,
    subsets: Vec<(Vec<usize>, Vec<Var>)>,
}

fn build(spec: &BooleanHigherOrder, obj: &PiecewiseAffineObjective) -> Result<(LpModel, Layout)> {
    check_inputs(&AmbiguitySpec::BooleanHigherOrder(spec.clone()), obj)?;
    let (n, k_count) = (spec.p.len(), obj.k());
    let mut model = LpModel::new(Sense::Maximize);
    let lambda: Vec<Var> = obj.b.iter().map(|&b| model.add_nonneg(b)).collect();
    model.add_row(lambda.iter().map(|&v| (v, 1.0)), RowSense::Eq, 1.0);
    let gamma: Vec<Vec<Var>> = (0..n).map(|i| (0..k_count).map(|k| model.add_nonneg(obj.a[k][i])).collect()).collect();
    for (i, gi) in gamma.iter().enumerate() {
        model.add_row(gi.iter().map(|&v| (v, 1.0)), RowSense::Eq, spec.p[i]);
    }
    for gi in &gamma {
        for (k, &g) in gi.iter().enumerate() {
            model.add_row([(g, 1.0), (lambda[k], -1.0)], RowSense::Le, 0.0);
        }
    }
    let mut subsets = Vec::new();
    for (set, q) in spec.resolved_targets() {
        let vars: Vec<Var> = (0..k_count).map(|_| model.add_nonneg(0.0)).collect();
        for (k, &g) in vars.iter().enumerate() {
            model.add_row([(g, 1.0), (lambda[k], -1.0)], RowSense::Le, 0.0);
            for &i in &set {
                model.add_row([(g, 1.0), (gamma[i][k], -1.0)], RowSense::Le, 0.0);
            }
        }
        model.add_row(vars.iter().map(|&v| (v, 1.0)), RowSense::Ge, q);
        subsets.push((set, vars));
    }
    Ok((model, Layout { lambda, gamma, subsets }))
}

/// The compact LP, for inspection or export.
pub fn boolean_model(spec: &BooleanHigherOrder, obj: &PiecewiseAffineObjective) -> Result<LpModel> {
    Ok(build(spec, obj)?.0)
}

/// Sharp bound over Boolean vectors with fixed marginals and lower bounds on the
/// probabilities that all coordinates of a subset are one.
pub fn solve_boolean_higher_order(
    spec: &BooleanHigherOrder,
    obj: &PiecewiseAffineObjective,
) -> Result<(BoundResult, CompactSolution)> {
    let (model, layout) = build(spec, obj)?;
    let sol = solve_certified(&model, "higher-order Boolean")?;
    let lambda: Vec<f64> = layout.lambda.iter().map(|&v| sol.value(v)).collect();
    let gamma_uni = layout
        .gamma
        .iter()
        .map(|gi| {
            gi.iter()
                .zip(&lambda)
                .map(|(&g, &l)| {
                    let one = sol.value(g);
                    vec![l - one, one]
                })
                .collect()
        })
        .collect();
    let gamma_subset: BTreeMap<Vec<usize>, Vec<f64>> =
        layout.subsets.into_iter().map(|(set, vars)| (set, vars.iter().map(|&v| sol.value(v)).collect())).collect();
    let cs = CompactSolution { lambda, gamma_uni, gamma_pair: BTreeMap::new(), gamma_subset };
    Ok((bound(sol.objective, sol.iterations), cs))
}

/// `min(Σ_i ξ_i, B)` on Boolean vectors as the maximum of `Σ_{i∈I} ξ_i` over `|I| ≤ B`,
/// pieces ordered by size and then lexicographically, starting with the empty set.
pub fn expand_rank_objective(n: usize, b: usize) -> Result<PiecewiseAffineObjective> {
    if b == 0 || b > n {
        return Err(Error::Invalid(format!("rank bound {b} must lie in 1..={n}")));
    }
    let mut count: usize = 0;
    let mut binom: usize = 1;
    for size in 0..=b {
        if size > 0 {
            binom = binom * (n - size + 1) / size;
        }
        count = count.saturating_add(binom);
    }
    if count > MAX_PIECES {
        return Err(Error::Invalid(format!("{count} pieces exceed the cap of {MAX_PIECES}")));
    }
    let mut a = vec![vec![0.0; n]];
    let mut sets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for size in 1..=b {
        for s in &sets {
            let mut row = vec![0.0; n];
            for &i in s {
                row[i] = 1.0;
            }
            a.push(row);
        }
        if size < b {
            sets = sets
                .iter()
                .flat_map(|s| (s[s.len() - 1] + 1..n).map(move |j| [s.as_slice(), &[j]].concat()))
                .collect();
        }
    }
    let k = a.len();
    PiecewiseAffineObjective::new(a, vec![0.0; k])
}
