//! Brute-force ground truth: the LP with one probability per lattice point, exact
//! expectations and membership checks.

use std::collections::BTreeMap;

use sharpbound_lp::{solve_lp, LpModel, LpStatus, RowSense, Sense, Var};

use crate::error::{Error, Result};
use crate::genbound::BoundResult;
use crate::lattice::LatticeFunction;
use crate::types::{validate_spec, AmbiguitySpec, JointDistribution, PiecewiseAffineObjective};

/// Default lattice cap for the exponential LP.
pub const ORACLE_CAP: usize = 10_000;
/// Tolerance on marginal equalities and constraint slacks in membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// One defining constraint of an ambiguity set, as a linear function of the pmf.
struct SpecRow {
    label: String,
    coeffs: Vec<f64>,
    sense: RowSense,
    rhs: f64,
    /// Marginal rows are reported separately from dependence rows.
    marginal: bool,
}

fn spec_rows(spec: &AmbiguitySpec, points: &[Vec<usize>]) -> Vec<SpecRow> {
    let support = spec.support();
    let values: Vec<Vec<f64>> = points.iter().map(|p| support.values(p)).collect();
    let mut rows = Vec::new();
    let marginal_rows = |rows: &mut Vec<SpecRow>, probs: Vec<Vec<f64>>| {
        for (i, pi) in probs.iter().enumerate() {
            for (v, &p) in pi.iter().enumerate() {
                rows.push(SpecRow {
                    label: format!("P(ξ{i} = {})", support.dims[i][v]),
                    coeffs: points.iter().map(|pt| f64::from(u8::from(pt[i] == v))).collect(),
                    sense: RowSense::Eq,
                    rhs: p,
                    marginal: true,
                });
            }
        }
    };
    match spec {
        AmbiguitySpec::GenericSubmodular(g) => {
            for (j, (c, o)) in g.constraints.iter().zip(g.oracles()).enumerate() {
                rows.push(SpecRow {
                    label: format!("constraint {j} ({:?})", c.kind),
                    coeffs: values.iter().map(|x| o(x)).collect(),
                    sense: RowSense::Le,
                    rhs: c.gamma,
                    marginal: false,
                });
            }
        }
        AmbiguitySpec::PodBivariate(p) => {
            marginal_rows(&mut rows, p.marginals.iter().map(|m| m.probs.clone()).collect());
            for (pt, t) in p.resolved_targets() {
                rows.push(SpecRow {
                    label: format!("P(ξ{} ≥ {}, ξ{} ≥ {})", pt.i, support.dims[pt.i][pt.u], pt.j, support.dims[pt.j][pt.w]),
                    coeffs: points.iter().map(|q| f64::from(u8::from(q[pt.i] >= pt.u && q[pt.j] >= pt.w))).collect(),
                    sense: RowSense::Ge,
                    rhs: t,
                    marginal: false,
                });
            }
        }
        AmbiguitySpec::BooleanHigherOrder(b) => {
            marginal_rows(&mut rows, b.marginals().into_iter().map(|m| m.probs).collect());
            for (set, q) in b.resolved_targets() {
                rows.push(SpecRow {
                    label: format!("E[Π ξ{set:?}]"),
                    coeffs: points.iter().map(|pt| f64::from(u8::from(set.iter().all(|&i| pt[i] == 1)))).collect(),
                    sense: RowSense::Ge,
                    rhs: q,
                    marginal: false,
                });
            }
        }
        AmbiguitySpec::Moment(m) => {
            for i in 0..m.support.n() {
                for l in 1..=m.num_moments(i) {
                    rows.push(SpecRow {
                        label: format!("E[h{l}(ξ{i})]"),
                        coeffs: points.iter().map(|pt| m.h(i, l, pt[i])).collect(),
                        sense: RowSense::Eq,
                        rhs: m.moments[i][l - 1],
                        marginal: true,
                    });
                }
            }
            for (&(i, j), &q) in &m.cross {
                rows.push(SpecRow {
                    label: format!("E[ξ{i} ξ{j}]"),
                    coeffs: values.iter().map(|x| x[i] * x[j]).collect(),
                    sense: RowSense::Ge,
                    rhs: q,
                    marginal: false,
                });
            }
        }
    }
    rows
}

/// `sup` (or `inf`) of `E[max_k a_k'ξ + b_k]` over the ambiguity set, by the full LP.
pub fn exponential_lp_bound(spec: &AmbiguitySpec, obj: &PiecewiseAffineObjective, sense: Sense) -> Result<BoundResult> {
    let issues = obj.issues(Some(spec.n()));
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(issues));
    }
    exponential_lp_bound_fn(spec, |x| obj.value(x), sense, ORACLE_CAP)
}

pub fn exponential_lp_bound_with_cap(
    spec: &AmbiguitySpec,
    obj: &PiecewiseAffineObjective,
    sense: Sense,
    cap: usize,
) -> Result<BoundResult> {
    let issues = obj.issues(Some(spec.n()));
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(issues));
    }
    exponential_lp_bound_fn(spec, |x| obj.value(x), sense, cap)
}

/// The full LP for an arbitrary objective function on the lattice.
pub fn exponential_lp_bound_fn(spec: &AmbiguitySpec, f: impl Fn(&[f64]) -> f64, sense: Sense, cap: usize) -> Result<BoundResult> {
    validate_spec(spec).into_result()?;
    let support = spec.support();
    support.size_within(cap)?;
    let points: Vec<Vec<usize>> = support.points().collect();
    let mut model = LpModel::new(sense);
    let vars: Vec<Var> = points.iter().map(|p| model.add_nonneg(f(&support.values(p)))).collect();
    model.add_row(vars.iter().map(|&v| (v, 1.0)), RowSense::Eq, 1.0);
    for row in spec_rows(spec, &points) {
        model.add_row(vars.iter().zip(&row.coeffs).map(|(&v, &c)| (v, c)), row.sense, row.rhs);
    }
    let sol = solve_lp(&model)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible("no distribution on the lattice satisfies the specification".into())),
        LpStatus::Unbounded => return Err(Error::Unbounded("exponential LP".into())),
    }
    let mass: BTreeMap<Vec<usize>, f64> = points
        .into_iter()
        .zip(&vars)
        .map(|(p, &v)| (p, sol.value(v).max(0.0)))
        .filter(|(_, m)| *m > 0.0)
        .collect();
    Ok(BoundResult {
        value: sol.objective,
        dual: None,
        cuts: Vec::new(),
        extremal: Some(JointDistribution { support, mass }),
        iterations: sol.iterations,
    })
}

/// `Σ f(ξ) P(ξ)`.
pub fn expectation(joint: &JointDistribution, f: &LatticeFunction) -> f64 {
    joint.expectation(|x| (f.eval)(x))
}

/// One violated constraint with its magnitude (distance past the tolerance boundary).
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub amount: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    /// Largest absolute error over marginal (or moment) equalities.
    pub max_marginal_error: f64,
    /// Smallest slack over dependence inequalities (positive means strictly satisfied).
    pub min_slack: f64,
    pub violations: Vec<Violation>,
}

impl MembershipReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every defining constraint of `spec` against `joint`.
pub fn check_membership(joint: &JointDistribution, spec: &AmbiguitySpec) -> MembershipReport {
    let mut violations = Vec::new();
    let support = spec.support();
    if !joint.support.same_as(&support) {
        violations.push(Violation { constraint: "support differs from the specification".into(), amount: f64::INFINITY });
        return MembershipReport { max_marginal_error: f64::INFINITY, min_slack: f64::NEG_INFINITY, violations };
    }
    for issue in joint.issues() {
        violations.push(Violation { constraint: issue, amount: (joint.total_mass() - 1.0).abs() });
    }
    let points: Vec<Vec<usize>> = joint.mass.keys().cloned().collect();
    let probs: Vec<f64> = joint.mass.values().copied().collect();
    let mut max_marginal_error: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    for row in spec_rows(spec, &points) {
        let act: f64 = row.coeffs.iter().zip(&probs).map(|(c, p)| c * p).sum();
        let (err, ok) = match row.sense {
            RowSense::Eq => {
                let e = (act - row.rhs).abs();
                max_marginal_error = max_marginal_error.max(e);
                (e, e <= MEMBERSHIP_TOL)
            }
            RowSense::Ge => {
                let s = act - row.rhs;
                min_slack = min_slack.min(s);
                (-s, s >= -MEMBERSHIP_TOL)
            }
            RowSense::Le => {
                let s = row.rhs - act;
                min_slack = min_slack.min(s);
                (-s, s >= -MEMBERSHIP_TOL)
            }
        };
        if !ok {
            let kind = if row.marginal { "marginal mismatch" } else { "constraint violated" };
            violations.push(Violation { constraint: format!("{kind}: {}", row.label), amount: err });
        }
    }
    MembershipReport { max_marginal_error, min_slack, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comonotone::{comonotone_coupling, independent_coupling};
    use crate::types::{DiscreteMarginal, GenericSubmodular, PodBivariate, ProductSupport};

    fn bern(p: f64) -> DiscreteMarginal {
        DiscreteMarginal::bernoulli(p).unwrap()
    }

    #[test]
    fn normalization_only_gives_lattice_max() {
        let s = ProductSupport::new(vec![vec![-1.0, 2.0], vec![0.0, 1.0, 4.0]]).unwrap();
        let spec = AmbiguitySpec::GenericSubmodular(GenericSubmodular::new(s, Vec::new()));
        let obj = PiecewiseAffineObjective::new(vec![vec![1.0, -1.0]], vec![0.5]).unwrap();
        let r = exponential_lp_bound(&spec, &obj, Sense::Maximize).unwrap();
        assert!((r.value - 2.5).abs() < 1e-9);
        let ext = r.extremal.unwrap();
        assert_eq!(ext.mass.len(), 1);
    }

    #[test]
    fn frechet_product_extremes() {
        let spec = AmbiguitySpec::GenericSubmodular(GenericSubmodular::frechet(&[bern(0.5), bern(0.5)]));
        let max = exponential_lp_bound_fn(&spec, |x| x[0] * x[1], Sense::Maximize, ORACLE_CAP).unwrap();
        assert!((max.value - 0.5).abs() < 1e-9);
        let min = exponential_lp_bound_fn(&spec, |x| x[0] * x[1], Sense::Minimize, ORACLE_CAP).unwrap();
        assert!(min.value.abs() < 1e-9);
    }

    #[test]
    fn expectation_examples() {
        let s = ProductSupport::boolean(2);
        let f = LatticeFunction::new(s.clone(), |x| x[0] + x[1]);
        let dirac = JointDistribution::dirac(s, vec![1, 0]).unwrap();
        assert_eq!(expectation(&dirac, &f), 1.0);
        let uniform = independent_coupling(&[bern(0.5), bern(0.5)]).unwrap();
        assert!((expectation(&uniform, &f) - 1.0).abs() < 1e-12);
        let co = comonotone_coupling(&[bern(0.75), bern(0.75)]).unwrap();
        let g = LatticeFunction::new(ProductSupport::boolean(2), |x| x[0] * x[1]);
        assert!((expectation(&co, &g) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn membership_examples() {
        let marginals = vec![DiscreteMarginal::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.5, 0.3]).unwrap(), bern(0.4)];
        let spec = AmbiguitySpec::PodBivariate(PodBivariate::pod(marginals.clone()));
        let ind = check_membership(&independent_coupling(&marginals).unwrap(), &spec);
        assert!(ind.passes(), "{:?}", ind.violations);
        assert!(ind.min_slack.abs() < 1e-12);
        let co = check_membership(&comonotone_coupling(&marginals).unwrap(), &spec);
        assert!(co.passes(), "{:?}", co.violations);

        let frechet = AmbiguitySpec::GenericSubmodular(GenericSubmodular::frechet(&marginals));
        let dirac = JointDistribution::dirac(spec.support(), vec![0, 0]).unwrap();
        let r = check_membership(&dirac, &frechet);
        assert!(!r.passes());
        let r = check_membership(&dirac, &spec);
        assert!(r.violations.iter().any(|v| v.constraint.starts_with("marginal mismatch")));
    }

    #[test]
    fn infeasible_spec_is_reported() {
        let s = ProductSupport::boolean(1);
        let spec = AmbiguitySpec::GenericSubmodular(GenericSubmodular::new(
            s,
            vec![crate::types::SubmodularConstraint::new(
                crate::types::ConstraintKind::Affine { coeffs: vec![-1.0], constant: 0.0 },
                -2.0,
            )],
        ));
        let obj = PiecewiseAffineObjective::coordinate_max(1);
        assert!(matches!(exponential_lp_bound(&spec, &obj, Sense::Maximize), Err(Error::Infeasible(_))));
    }
}
