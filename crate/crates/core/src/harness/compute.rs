use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::io::{JointDoc, Problem, ResultDoc};
use crate::compact::{extract_extremal, solve_boolean_higher_order, solve_moment, solve_pod_bivariate};
use crate::error::{Error, Result};
use crate::genbound::{as_generic, sharp_bound_generic, BoundResult};
use crate::oracle::{check_membership, exponential_lp_bound};
use crate::types::{AmbiguitySpec, JointDistribution};
use sharpbound_lp::Sense;

/// Largest accepted gap between a bound and the exponential LP under `verify`.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Compact LP when the family has one, cutting planes otherwise.
    Auto,
    Compact,
    /// Cutting planes over the family's generic encoding.
    Generic,
    /// Exponential LP over the whole lattice.
    Oracle,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "auto" => Ok(Method::Auto),
            "compact" => Ok(Method::Compact),
            "generic" => Ok(Method::Generic),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::Invalid(format!("unknown method {other:?}; expected auto, compact, generic or oracle"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Auto => "auto",
            Method::Compact => "compact",
            Method::Generic => "generic",
            Method::Oracle => "oracle",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComputeOptions {
    /// Cross-check the value against the exponential LP.
    pub verify: bool,
    /// Attach an extremal distribution, checked for membership.
    pub extract: bool,
}

fn resolve(method: Method, spec: &AmbiguitySpec) -> Result<Method> {
    let generic = matches!(spec, AmbiguitySpec::GenericSubmodular(_));
    match method {
        Method::Auto if generic => Ok(Method::Generic),
        Method::Auto => Ok(Method::Compact),
        Method::Compact if generic => Err(Error::Invalid("generic submodular sets have no compact LP".into())),
        m => Ok(m),
    }
}

/// Bound and, when asked for, an extremal distribution.
fn solve(problem: &Problem, method: Method, extract: bool) -> Result<(BoundResult, Option<JointDistribution>)> {
    let (spec, obj) = (&problem.spec, &problem.objective);
    let (bound, joint) = match method {
        Method::Compact => {
            let (bound, sol) = match spec {
                AmbiguitySpec::PodBivariate(s) => solve_pod_bivariate(s, obj)?,
                AmbiguitySpec::BooleanHigherOrder(s) => solve_boolean_higher_order(s, obj)?,
                AmbiguitySpec::Moment(s) => solve_moment(s, obj)?,
                AmbiguitySpec::GenericSubmodular(_) => unreachable!("resolved to generic"),
            };
            let joint = if extract { Some(extract_extremal(spec, obj, &sol)?) } else { None };
            (bound, joint)
        }
        Method::Generic => {
            let mut bound = sharp_bound_generic(&as_generic(spec), obj)?;
            let joint = bound.extremal.take();
            (bound, joint)
        }
        Method::Oracle | Method::Auto => {
            let mut bound = exponential_lp_bound(spec, obj, Sense::Maximize)?;
            let joint = bound.extremal.take();
            (bound, joint)
        }
    };
    Ok((bound, if extract { joint } else { None }))
}

/// Solves `problem` with `method` and assembles the result document. Verification and
/// membership failures are reported as [`Error::Verification`].
pub fn compute(problem: &Problem, method: Method, opts: ComputeOptions) -> Result<ResultDoc> {
    let method = resolve(method, &problem.spec)?;
    let start = Instant::now();
    let (bound, joint) = solve(problem, method, opts.extract)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(joint) = &joint {
        let report = check_membership(joint, &problem.spec);
        if !report.passes() {
            return Err(Error::Verification(format!("extremal distribution violates the specification: {:?}", report.violations)));
        }
        let attained = joint.expectation(|x| problem.objective.value(x));
        if (attained - bound.value).abs() > VERIFY_TOL * (1.0 + bound.value.abs()) {
            return Err(Error::Verification(format!("extremal distribution attains {attained}, bound is {}", bound.value)));
        }
    }
    let oracle_value = if opts.verify {
        let oracle = exponential_lp_bound(&problem.spec, &problem.objective, Sense::Maximize)?.value;
        if (oracle - bound.value).abs() > VERIFY_TOL {
            return Err(Error::Verification(format!("{method} bound {} differs from the exponential LP value {oracle}", bound.value)));
        }
        Some(oracle)
    } else {
        None
    };
    Ok(ResultDoc {
        family: problem.spec.family().to_string(),
        method: method.to_string(),
        value: bound.value,
        iterations: bound.iterations,
        runtime_ms,
        oracle_value,
        extremal: joint.as_ref().map(JointDoc::from_joint),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BooleanHigherOrder, DiscreteMarginal, MomentBasis, MomentSpec, PiecewiseAffineObjective, PodBivariate, ProductSupport};
    use std::collections::BTreeMap;

    fn pod_problem() -> Problem {
        let m = vec![DiscreteMarginal::bernoulli(0.5).unwrap(), DiscreteMarginal::bernoulli(0.5).unwrap()];
        Problem { spec: AmbiguitySpec::PodBivariate(PodBivariate::pod(m)), objective: PiecewiseAffineObjective::coordinate_max(2) }
    }

    #[test]
    fn every_method_agrees_on_the_pod_example() {
        let p = pod_problem();
        for method in [Method::Auto, Method::Compact, Method::Generic, Method::Oracle] {
            let doc = compute(&p, method, ComputeOptions { verify: true, extract: true }).unwrap();
            assert!((doc.value - 0.75).abs() < 1e-9, "{method}: {}", doc.value);
            assert_eq!(doc.oracle_value.map(|v| (v - 0.75).abs() < 1e-9), Some(true));
            assert!(doc.extremal.is_some());
        }
        assert_eq!(compute(&p, Method::Auto, ComputeOptions::default()).unwrap().method, "compact");
    }

    #[test]
    fn methods_parse() {
        assert_eq!("generic".parse::<Method>().unwrap(), Method::Generic);
        assert!("simplex".parse::<Method>().is_err());
    }

    #[test]
    fn contradictory_moments_are_infeasible() {
        // on {0, 1} the second moment equals the first
        let spec = MomentSpec {
            support: ProductSupport::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap(),
            moments: vec![vec![0.5, 0.2], vec![0.5, 0.5]],
            basis: MomentBasis::Powers,
            cross: BTreeMap::new(),
        };
        let p = Problem { spec: AmbiguitySpec::Moment(spec), objective: PiecewiseAffineObjective::coordinate_max(2) };
        assert!(matches!(compute(&p, Method::Auto, ComputeOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn compact_is_rejected_for_generic_sets() {
        let p = pod_problem();
        let generic = Problem { spec: AmbiguitySpec::GenericSubmodular(as_generic(&p.spec)), objective: p.objective.clone() };
        assert!(matches!(compute(&generic, Method::Compact, ComputeOptions::default()), Err(Error::Invalid(_))));
        assert_eq!(compute(&generic, Method::Auto, ComputeOptions::default()).unwrap().method, "generic");
        let boolean = Problem {
            spec: AmbiguitySpec::BooleanHigherOrder(BooleanHigherOrder::new(vec![0.3, 0.3, 0.3], 2)),
            objective: PiecewiseAffineObjective::coordinate_max(3),
        };
        let doc = compute(&boolean, Method::Generic, ComputeOptions { verify: true, extract: false }).unwrap();
        assert!((doc.value - 0.72).abs() < 1e-7);
    }
}
