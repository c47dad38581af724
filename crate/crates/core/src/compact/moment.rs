use std::collections::BTreeMap;

use sharpbound_lp::{Basis, LpModel, RowSense, Sense, Var};

use super::pod::{check_inputs, uni_block};
use super::{bound, solve_certified_from, CompactSolution, UniBlock};
use crate::error::Result;
use crate::genbound::BoundResult;
use crate::types::{AmbiguitySpec, MomentSpec, PiecewiseAffineObjective};

struct Layout {
    uni: UniBlock,
    /// `(i, j)` to `[k][u][w]`
    pair: Vec<((usize, usize), Vec<Vec<Vec<Var>>>)>,
}

fn build(spec: &MomentSpec, obj: &PiecewiseAffineObjective) -> Result<(LpModel, Layout)> {
    check_inputs(&AmbiguitySpec::Moment(spec.clone()), obj)?;
    let dims = &spec.support.dims;
    let k_count = obj.k();
    let mut model = LpModel::new(Sense::Maximize);
    let uni = uni_block(&mut model, dims, obj);
    // Pairs without a cross-moment target impose nothing beyond the univariate rows, since
    // any pair of conditional marginals admits a coupling.
    let mut pair = Vec::new();
    for (&(i, j), &q) in &spec.cross {
        let (li, lj) = (dims[i].len(), dims[j].len());
        let vars: Vec<Vec<Vec<Var>>> =
            (0..k_count).map(|_| (0..li).map(|_| (0..lj).map(|_| model.add_nonneg(0.0)).collect()).collect()).collect();
        for k in 0..k_count {
            for w in 0..lj {
                let terms = (0..li).map(|u| (vars[k][u][w], 1.0)).chain(std::iter::once((uni.gamma[j][k][w], -1.0)));
                model.add_row(terms, RowSense::Eq, 0.0);
            }
            for u in 0..li {
                let terms = (0..lj).map(|w| (vars[k][u][w], 1.0)).chain(std::iter::once((uni.gamma[i][k][u], -1.0)));
                model.add_row(terms, RowSense::Eq, 0.0);
            }
        }
        let cross = (0..k_count)
            .flat_map(|k| (0..li).flat_map(move |u| (0..lj).map(move |w| (k, u, w))))
            .map(|(k, u, w)| (vars[k][u][w], dims[i][u] * dims[j][w]));
        model.add_row(cross, RowSense::Ge, q);
        pair.push(((i, j), vars));
    }
    // Moment rows go last, by degree, so that the model for degree L is a row prefix of
    // the model for degree L + 1.
    let max_l = (0..dims.len()).map(|i| spec.num_moments(i)).max().unwrap_or(0);
    for l in 1..=max_l {
        for i in (0..dims.len()).filter(|&i| l <= spec.num_moments(i)) {
            let terms = (0..k_count).flat_map(|k| (0..dims[i].len()).map(move |v| (k, v))).map(|(k, v)| (uni.gamma[i][k][v], spec.h(i, l, v)));
            model.add_row(terms, RowSense::Eq, spec.moments[i][l - 1]);
        }
    }
    Ok((model, Layout { uni, pair }))
}

/// The compact LP, for inspection or export.
pub fn moment_model(spec: &MomentSpec, obj: &PiecewiseAffineObjective) -> Result<LpModel> {
    Ok(build(spec, obj)?.0)
}

/// Sharp bound over distributions with fixed univariate moments and cross-moment lower bounds.
pub fn solve_moment(spec: &MomentSpec, obj: &PiecewiseAffineObjective) -> Result<(BoundResult, CompactSolution)> {
    solve_moment_from(spec, obj, None).map(|(r, s, _)| (r, s))
}

/// As [`solve_moment`], warm-started from the basis of a spec with the same support,
/// objective and cross pairs but fewer moments. Also returns the final basis.
pub fn solve_moment_from(
    spec: &MomentSpec,
    obj: &PiecewiseAffineObjective,
    warm: Option<&Basis>,
) -> Result<(BoundResult, CompactSolution, Option<Basis>)> {
    let (model, layout) = build(spec, obj)?;
    let sol = solve_certified_from(&model, "moment", warm)?;
    let (lambda, gamma_uni) = layout.uni.values(&sol);
    let gamma_pair = layout
        .pair
        .into_iter()
        .map(|(key, vars)| {
            let vals = vars.iter().map(|vk| vk.iter().map(|vu| vu.iter().map(|&v| sol.value(v)).collect()).collect()).collect();
            (key, vals)
        })
        .collect();
    let cs = CompactSolution { lambda, gamma_uni, gamma_pair, gamma_subset: BTreeMap::new() };
    Ok((bound(sol.objective, sol.iterations), cs, sol.basis))
}
