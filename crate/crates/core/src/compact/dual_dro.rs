use sharpbound_lp::{LpModel, RowSense, Sense, Var};

use super::solve_certified;
use crate::decision::{AffinePieces, Polyhedron};
use crate::error::{Error, Result};
use crate::types::{validate_spec, AmbiguitySpec, PodBivariate};

/// The dual of the bivariate dependence LP with the decision folded in.
#[derive(Clone, Debug)]
pub struct DualDroModel {
    pub model: LpModel,
    /// Decision variables, in the order of the polyhedron's coordinates.
    pub x: Vec<Var>,
}

/// Builds `min t + Σ y_i(v) p_i(v) - Σ l·T` over `(x, t, y, g, h, q, l)` with
///
/// * `t - Σ_i g_ik - b_k(x) ≥ 0` for every piece,
/// * `h_k + q_k - l ≥ 0` for every target and piece,
/// * `y_i(v) + g_ik - Σ h_k - Σ q_k - a_ik(x) ξ_i(v) ≥ 0`, where `h` sums over targets with
///   `i` as first coordinate and threshold at most `v`, `q` over targets with `i` as second,
///
/// `h, q, l ≥ 0` and `x ∈ X`. Every block runs over the targeted pairs `i < j`.
pub fn build_dual_dro(spec: &PodBivariate, x_set: &Polyhedron, pieces: &AffinePieces) -> Result<DualDroModel> {
    validate_spec(&AmbiguitySpec::PodBivariate(spec.clone())).into_result()?;
    x_set.check()?;
    pieces.check()?;
    let n = spec.marginals.len();
    if pieces.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: pieces.n() });
    }
    if pieces.dim() != x_set.dim() {
        return Err(Error::DimensionMismatch { expected: x_set.dim(), got: pieces.dim() });
    }
    let (k_count, d) = (pieces.k(), pieces.dim());
    let mut model = LpModel::new(Sense::Minimize);
    let x = x_set.add_to(&mut model);
    let t = model.add_free(1.0);
    let y: Vec<Vec<Var>> = spec.marginals.iter().map(|m| m.probs.iter().map(|&p| model.add_free(p)).collect()).collect();
    let g: Vec<Vec<Var>> = (0..n).map(|_| (0..k_count).map(|_| model.add_free(0.0)).collect()).collect();
    let targets = spec.resolved_targets();
    let l: Vec<Var> = targets.iter().map(|&(_, tv)| model.add_nonneg(-tv)).collect();
    let h: Vec<Vec<Var>> = targets.iter().map(|_| (0..k_count).map(|_| model.add_nonneg(0.0)).collect()).collect();
    let q: Vec<Vec<Var>> = targets.iter().map(|_| (0..k_count).map(|_| model.add_nonneg(0.0)).collect()).collect();

    for k in 0..k_count {
        let mut terms = vec![(t, 1.0)];
        terms.extend((0..n).map(|i| (g[i][k], -1.0)));
        terms.extend((0..d).map(|m| (x[m], -pieces.bx[k][m])));
        model.add_row(terms, RowSense::Ge, pieces.b0[k]);
    }
    for (ti, _) in targets.iter().enumerate() {
        for k in 0..k_count {
            model.add_row([(h[ti][k], 1.0), (q[ti][k], 1.0), (l[ti], -1.0)], RowSense::Ge, 0.0);
        }
    }
    for (i, m) in spec.marginals.iter().enumerate() {
        for k in 0..k_count {
            for (v, &xv) in m.values.iter().enumerate() {
                let mut terms = vec![(y[i][v], 1.0), (g[i][k], 1.0)];
                for (ti, (pt, _)) in targets.iter().enumerate() {
                    if pt.i == i && pt.u <= v {
                        terms.push((h[ti][k], -1.0));
                    }
                    if pt.j == i && pt.w <= v {
                        terms.push((q[ti][k], -1.0));
                    }
                }
                terms.extend((0..d).map(|mm| (x[mm], -xv * pieces.ax[k][i][mm])));
                model.add_row(terms, RowSense::Ge, pieces.a0[k][i] * xv);
            }
        }
    }
    Ok(DualDroModel { model, x })
}

/// Minimizes the worst-case expectation over the decision set; returns `(x*, value)`.
pub fn solve_dual_dro(spec: &PodBivariate, x_set: &Polyhedron, pieces: &AffinePieces) -> Result<(Vec<f64>, f64)> {
    let dm = build_dual_dro(spec, x_set, pieces)?;
    let sol = solve_certified(&dm.model, "robust dual").map_err(|e| match e {
        Error::Infeasible(_) => Error::Infeasible("decision set is empty".into()),
        other => other,
    })?;
    Ok((dm.x.iter().map(|&v| sol.value(v)).collect(), sol.objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::solve_pod_bivariate;
    use crate::types::{DiscreteMarginal, PiecewiseAffineObjective};

    fn spec() -> PodBivariate {
        PodBivariate::pod(vec![
            DiscreteMarginal::new(vec![0.0, 1.0, 2.0], vec![0.3, 0.4, 0.3]).unwrap(),
            DiscreteMarginal::bernoulli(0.6).unwrap(),
        ])
    }

    #[test]
    fn fixed_decision_matches_primal() {
        let obj = PiecewiseAffineObjective::new(vec![vec![1.0, -0.5], vec![-0.3, 1.2], vec![0.2, 0.2]], vec![0.0, 0.1, 0.3]).unwrap();
        let pieces = AffinePieces::constant(&obj, 1);
        let (_, v) = solve_dual_dro(&spec(), &Polyhedron::singleton(&[0.4]), &pieces).unwrap();
        let (r, _) = solve_pod_bivariate(&spec(), &obj).unwrap();
        assert!((v - r.value).abs() < 1e-8, "{v} vs {}", r.value);
    }

    #[test]
    fn single_piece_is_linear_in_decision() {
        // (x1 ξ1 + (1 - x1) ξ2) with x ∈ [0, 1]: means 1.0 and 0.6 favour x1 = 0
        let pieces = AffinePieces::new(vec![vec![0.0, 1.0]], vec![vec![vec![1.0], vec![-1.0]]], vec![0.0], vec![vec![0.0]]).unwrap();
        let (x, v) = solve_dual_dro(&spec(), &Polyhedron::unit_box(1), &pieces).unwrap();
        assert!((v - 0.6).abs() < 1e-9);
        assert!(x[0].abs() < 1e-9);
    }
}
