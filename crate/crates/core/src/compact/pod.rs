use std::collections::BTreeMap;

use sharpbound_lp::{LpModel, RowSense, Sense, Var};

use super::{bound, solve_certified, CompactSolution, UniBlock};
use crate::error::{Error, Result};
use crate::genbound::BoundResult;
use crate::types::{validate_spec, AmbiguitySpec, PairPoint, PiecewiseAffineObjective, PodBivariate};

pub(crate) fn check_inputs(spec: &AmbiguitySpec, obj: &PiecewiseAffineObjective) -> Result<()> {
    validate_spec(spec).into_result()?;
    let issues = obj.issues(Some(spec.n()));
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(issues));
    }
    Ok(())
}

/// Adds `λ_k`, `γ_ik(v)` with objective `b_k λ_k + a_ik ξ_i(v) γ_ik(v)`, the row `Σλ = 1`
/// and the rows `Σ_v γ_ik(v) - λ_k = 0`.
pub(crate) fn uni_block(model: &mut LpModel, dims: &[Vec<f64>], obj: &PiecewiseAffineObjective) -> UniBlock {
    let k_count = obj.k();
    let lambda: Vec<Var> = obj.b.iter().map(|&b| model.add_nonneg(b)).collect();
    model.add_row(lambda.iter().map(|&v| (v, 1.0)), RowSense::Eq, 1.0);
    let gamma: Vec<Vec<Vec<Var>>> = dims
        .iter()
        .enumerate()
        .map(|(i, d)| (0..k_count).map(|k| d.iter().map(|&x| model.add_nonneg(obj.a[k][i] * x)).collect()).collect())
        .collect();
    for gi in &gamma {
        for (k, gik) in gi.iter().enumerate() {
            let terms = gik.iter().map(|&v| (v, 1.0)).chain(std::iter::once((lambda[k], -1.0)));
            model.add_row(terms, RowSense::Eq, 0.0);
        }
    }
    UniBlock { lambda, gamma }
}

struct Layout {
    uni: UniBlock,
    targets: Vec<(PairPoint, f64)>,
    /// `[target][k]`
    pair: Vec<Vec<Var>>,
}

fn build(spec: &PodBivariate, obj: &PiecewiseAffineObjective) -> Result<(LpModel, Layout)> {
    check_inputs(&AmbiguitySpec::PodBivariate(spec.clone()), obj)?;
    let dims: Vec<Vec<f64>> = spec.marginals.iter().map(|m| m.values.clone()).collect();
    let mut model = LpModel::new(Sense::Maximize);
    let uni = uni_block(&mut model, &dims, obj);
    for (i, m) in spec.marginals.iter().enumerate() {
        for (v, &p) in m.probs.iter().enumerate() {
            model.add_row((0..obj.k()).map(|k| (uni.gamma[i][k][v], 1.0)), RowSense::Eq, p);
        }
    }
    let targets = spec.resolved_targets();
    let mut pair = Vec::with_capacity(targets.len());
    for &(pt, t) in &targets {
        let vars: Vec<Var> = (0..obj.k()).map(|_| model.add_nonneg(0.0)).collect();
        for (k, &g) in vars.iter().enumerate() {
            let tail_i = uni.gamma[pt.i][k][pt.u..].iter().map(|&v| (v, -1.0));
            model.add_row(std::iter::once((g, 1.0)).chain(tail_i), RowSense::Le, 0.0);
            let tail_j = uni.gamma[pt.j][k][pt.w..].iter().map(|&v| (v, -1.0));
            model.add_row(std::iter::once((g, 1.0)).chain(tail_j), RowSense::Le, 0.0);
        }
        model.add_row(vars.iter().map(|&v| (v, 1.0)), RowSense::Ge, t);
        pair.push(vars);
    }
    Ok((model, Layout { uni, targets, pair }))
}

/// The compact LP, for inspection or export.
pub fn pod_model(spec: &PodBivariate, obj: &PiecewiseAffineObjective) -> Result<LpModel> {
    Ok(build(spec, obj)?.0)
}

/// Sharp bound over fixed marginals with pairwise upper-tail lower bounds.
pub fn solve_pod_bivariate(spec: &PodBivariate, obj: &PiecewiseAffineObjective) -> Result<(BoundResult, CompactSolution)> {
    let (model, layout) = build(spec, obj)?;
    let sol = solve_certified(&model, "bivariate dependence")?;
    let (lambda, gamma_uni) = layout.uni.values(&sol);
    let mut gamma_pair: BTreeMap<(usize, usize), Vec<Vec<Vec<f64>>>> = BTreeMap::new();
    for ((pt, _), vars) in layout.targets.iter().zip(&layout.pair) {
        let (li, lj) = (spec.marginals[pt.i].len(), spec.marginals[pt.j].len());
        let entry = gamma_pair.entry((pt.i, pt.j)).or_insert_with(|| vec![vec![vec![0.0; lj]; li]; obj.k()]);
        for (k, &v) in vars.iter().enumerate() {
            entry[k][pt.u][pt.w] = sol.value(v);
        }
    }
    let cs = CompactSolution { lambda, gamma_uni, gamma_pair, gamma_subset: BTreeMap::new() };
    Ok((bound(sol.objective, sol.iterations), cs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DiscreteMarginal;

    fn fair() -> Vec<DiscreteMarginal> {
        vec![DiscreteMarginal::bernoulli(0.5).unwrap(), DiscreteMarginal::bernoulli(0.5).unwrap()]
    }

    #[test]
    fn pod_coordinate_max() {
        let (r, sol) = solve_pod_bivariate(&PodBivariate::pod(fair()), &PiecewiseAffineObjective::coordinate_max(2)).unwrap();
        assert!((r.value - 0.75).abs() < 1e-9, "{}", r.value);
        assert!(sol.issues().is_empty(), "{:?}", sol.issues());
    }

    #[test]
    fn empty_target_map_is_frechet() {
        let spec = PodBivariate { marginals: fair(), targets: Some(BTreeMap::new()) };
        let (r, _) = solve_pod_bivariate(&spec, &PiecewiseAffineObjective::coordinate_max(2)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_piece_is_sum_of_means() {
        let marginals = vec![
            DiscreteMarginal::new(vec![-1.0, 0.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap(),
            DiscreteMarginal::new(vec![1.0, 4.0], vec![0.75, 0.25]).unwrap(),
        ];
        let expected = marginals[0].mean() + marginals[1].mean();
        let obj = PiecewiseAffineObjective::new(vec![vec![1.0, 1.0]], vec![0.0]).unwrap();
        let (r, _) = solve_pod_bivariate(&PodBivariate::pod(marginals), &obj).unwrap();
        assert!((r.value - expected).abs() < 1e-9);
    }

    #[test]
    fn model_dimensions() {
        let marginals = vec![
            DiscreteMarginal::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap(),
            DiscreteMarginal::bernoulli(0.3).unwrap(),
            DiscreteMarginal::bernoulli(0.6).unwrap(),
        ];
        let spec = PodBivariate::pod(marginals);
        let obj = PiecewiseAffineObjective::coordinate_max(3);
        let m = pod_model(&spec, &obj).unwrap();
        let (k, n, sum_len) = (3, 3, 7);
        let targets = 3 * 2 + 3 * 2 + 2 * 2;
        assert_eq!(m.num_vars(), k + k * sum_len + k * targets);
        assert_eq!(m.num_rows(), 1 + sum_len + n * k + (2 * k + 1) * targets);
    }

    #[test]
    fn targets_at_the_cap_are_attained_by_the_comonotone_coupling() {
        let marginals = vec![
            DiscreteMarginal::bernoulli(0.5).unwrap(),
            DiscreteMarginal::bernoulli(0.3).unwrap(),
            DiscreteMarginal::bernoulli(0.7).unwrap(),
        ];
        let targets = BTreeMap::from([
            (PairPoint { i: 0, j: 1, u: 1, w: 1 }, 0.3),
            (PairPoint { i: 0, j: 2, u: 1, w: 1 }, 0.5),
            (PairPoint { i: 1, j: 2, u: 1, w: 1 }, 0.3),
        ]);
        let spec = PodBivariate { marginals, targets: Some(targets) };
        let (r, _) = solve_pod_bivariate(&spec, &PiecewiseAffineObjective::coordinate_max(3)).unwrap();
        // every coupling is forced to be comonotone, whose maximum is the largest marginal
        assert!((r.value - 0.7).abs() < 1e-9, "{}", r.value);
    }
}
