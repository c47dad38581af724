//! JSON documents for problems, joint distributions and results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    validate_spec, AmbiguitySpec, BooleanHigherOrder, ConstraintKind, DiscreteMarginal, GenericSubmodular, JointDistribution,
    MomentBasis, MomentSpec, PairPoint, PiecewiseAffineObjective, PodBivariate, ProductSupport, SubmodularConstraint,
};

/// Objective `max_k a_k'ξ + b_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalDoc {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

/// `P(ξ_i ≥ ti, ξ_j ≥ tj) ≥ value`, thresholds given as support values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailTargetDoc {
    pub i: usize,
    pub j: usize,
    pub ti: f64,
    pub tj: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetTargetDoc {
    pub set: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossDoc {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// `E[f(ξ)] ≤ gamma` for a structured submodular `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintDoc {
    Indicator { dim: usize, value: f64, sign: f64, gamma: f64 },
    Affine { coeffs: Vec<f64>, constant: f64, gamma: f64 },
    NegProduct { i: usize, j: usize, gamma: f64 },
    NegUpperOrthant { i: usize, j: usize, ti: f64, tj: f64, gamma: f64 },
    Table { values: Vec<f64>, gamma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmbiguityDoc {
    /// Needs the top-level support. Listed marginals are pinned with indicator constraints.
    GenericSubmodular {
        constraints: Vec<ConstraintDoc>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        marginals: Vec<MarginalDoc>,
    },
    /// Without `targets`, every pair and threshold gets the independent value.
    PodBivariate {
        marginals: Vec<MarginalDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        targets: Option<Vec<TailTargetDoc>>,
    },
    /// Sets missing from `q` default to the product of their marginals.
    BooleanHigherOrder {
        p: Vec<f64>,
        m: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        q: Vec<SubsetTargetDoc>,
    },
    /// Needs the top-level support. `moments[i][l-1]` is the `l`-th moment of coordinate `i`.
    Moment {
        moments: Vec<Vec<f64>>,
        #[serde(default = "powers", skip_serializing_if = "is_powers")]
        basis: MomentBasis,
        #[serde(default)]
        cross: Vec<CrossDoc>,
    },
}

fn powers() -> MomentBasis {
    MomentBasis::Powers
}

fn is_powers(b: &MomentBasis) -> bool {
    *b == MomentBasis::Powers
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    /// Per-coordinate support values; implied by the marginals for POD and Boolean sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<Vec<f64>>>,
    pub objective: ObjectiveDoc,
    pub ambiguity: AmbiguityDoc,
}

/// A validated ambiguity set and objective.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: AmbiguitySpec,
    pub objective: PiecewiseAffineObjective,
}

fn marginal(doc: &MarginalDoc) -> Result<DiscreteMarginal> {
    DiscreteMarginal::new(doc.values.clone(), doc.probs.clone())
}

fn marginal_doc(m: &DiscreteMarginal) -> MarginalDoc {
    MarginalDoc { values: m.values.clone(), probs: m.probs.clone() }
}

fn required_support(support: &Option<Vec<Vec<f64>>>, kind: &str) -> Result<ProductSupport> {
    match support {
        Some(dims) => ProductSupport::new(dims.clone()),
        None => Err(Error::Invalid(format!("{kind} problems need a top-level support"))),
    }
}

fn constraint(doc: &ConstraintDoc) -> SubmodularConstraint {
    let (kind, gamma) = match doc.clone() {
        ConstraintDoc::Indicator { dim, value, sign, gamma } => (ConstraintKind::Indicator { dim, value, sign }, gamma),
        ConstraintDoc::Affine { coeffs, constant, gamma } => (ConstraintKind::Affine { coeffs, constant }, gamma),
        ConstraintDoc::NegProduct { i, j, gamma } => (ConstraintKind::NegProduct { i, j }, gamma),
        ConstraintDoc::NegUpperOrthant { i, j, ti, tj, gamma } => (ConstraintKind::NegUpperOrthant { i, j, ti, tj }, gamma),
        ConstraintDoc::Table { values, gamma } => (ConstraintKind::Table(values), gamma),
    };
    SubmodularConstraint::new(kind, gamma)
}

fn constraint_doc(c: &SubmodularConstraint) -> Result<ConstraintDoc> {
    let gamma = c.gamma;
    Ok(match c.kind.clone() {
        ConstraintKind::Indicator { dim, value, sign } => ConstraintDoc::Indicator { dim, value, sign, gamma },
        ConstraintKind::Affine { coeffs, constant } => ConstraintDoc::Affine { coeffs, constant, gamma },
        ConstraintKind::NegProduct { i, j } => ConstraintDoc::NegProduct { i, j, gamma },
        ConstraintKind::NegUpperOrthant { i, j, ti, tj } => ConstraintDoc::NegUpperOrthant { i, j, ti, tj, gamma },
        ConstraintKind::Table(values) => ConstraintDoc::Table { values, gamma },
        ConstraintKind::Custom(_) => return Err(Error::Invalid("custom oracles cannot be serialized".into())),
    })
}

fn check_within(n: usize, idx: &[usize], what: &str) -> Result<()> {
    match idx.iter().find(|&&i| i >= n) {
        Some(i) => Err(Error::Invalid(format!("{what} refers to coordinate {i} of {n}"))),
        None => Ok(()),
    }
}

impl Problem {
    pub fn from_doc(doc: &ProblemDoc) -> Result<Problem> {
        let objective = PiecewiseAffineObjective::new(doc.objective.a.clone(), doc.objective.b.clone())?;
        let spec = match &doc.ambiguity {
            AmbiguityDoc::GenericSubmodular { constraints, marginals } => {
                let support = required_support(&doc.support, "generic")?;
                let mut g = if marginals.is_empty() {
                    GenericSubmodular::new(support.clone(), Vec::new())
                } else {
                    let ms = marginals.iter().map(marginal).collect::<Result<Vec<_>>>()?;
                    let g = GenericSubmodular::frechet(&ms);
                    if !g.support.same_as(&support) {
                        return Err(Error::Invalid("marginal values differ from the support".into()));
                    }
                    g
                };
                for c in constraints {
                    if let ConstraintDoc::Table { values, .. } = c {
                        if Some(values.len()) != support.size() {
                            return Err(Error::Invalid(format!("table constraint has {} values, lattice has {:?}", values.len(), support.size())));
                        }
                    }
                    g.constraints.push(constraint(c));
                }
                AmbiguitySpec::GenericSubmodular(g)
            }
            AmbiguityDoc::PodBivariate { marginals, targets } => {
                let ms = marginals.iter().map(marginal).collect::<Result<Vec<_>>>()?;
                let mut spec = PodBivariate::pod(ms);
                if let Some(ts) = targets {
                    let mut map = BTreeMap::new();
                    for t in ts {
                        check_within(spec.marginals.len(), &[t.i, t.j], "tail target")?;
                        let find = |d: usize, v: f64| {
                            spec.marginals[d].values.iter().position(|&x| (x - v).abs() <= 1e-12).ok_or_else(|| {
                                Error::Invalid(format!("threshold {v} is not a support value of coordinate {d}"))
                            })
                        };
                        map.insert(PairPoint { i: t.i, j: t.j, u: find(t.i, t.ti)?, w: find(t.j, t.tj)? }, t.value);
                    }
                    spec.targets = Some(map);
                }
                AmbiguitySpec::PodBivariate(spec)
            }
            AmbiguityDoc::BooleanHigherOrder { p, m, q } => {
                let mut spec = BooleanHigherOrder::new(p.clone(), *m);
                for t in q {
                    check_within(p.len(), &t.set, "subset target")?;
                    let mut set = t.set.clone();
                    set.sort_unstable();
                    spec.q.insert(set, t.value);
                }
                AmbiguitySpec::BooleanHigherOrder(spec)
            }
            AmbiguityDoc::Moment { moments, basis, cross } => {
                let support = required_support(&doc.support, "moment")?;
                let mut map = BTreeMap::new();
                for c in cross {
                    check_within(support.n(), &[c.i, c.j], "cross moment")?;
                    map.insert((c.i.min(c.j), c.i.max(c.j)), c.value);
                }
                AmbiguitySpec::Moment(MomentSpec { support, moments: moments.clone(), basis: basis.clone(), cross: map })
            }
        };
        if let (Some(dims), false) = (&doc.support, matches!(spec, AmbiguitySpec::GenericSubmodular(_) | AmbiguitySpec::Moment(_))) {
            if !spec.support().same_as(&ProductSupport::new(dims.clone())?) {
                return Err(Error::Invalid("support differs from the one implied by the marginals".into()));
            }
        }
        validate_spec(&spec).into_result()?;
        let issues = objective.issues(Some(spec.n()));
        if !issues.is_empty() {
            return Err(Error::InvalidSpec(issues));
        }
        Ok(Problem { spec, objective })
    }

    pub fn from_json(text: &str) -> Result<Problem> {
        let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Problem::from_doc(&doc)
    }

    pub fn to_doc(&self) -> Result<ProblemDoc> {
        let objective = ObjectiveDoc { a: self.objective.a.clone(), b: self.objective.b.clone() };
        let (support, ambiguity) = match &self.spec {
            AmbiguitySpec::GenericSubmodular(g) => {
                // Fréchet rows are implied by the listed marginals.
                let implied = if g.marginals.is_empty() { 0 } else { GenericSubmodular::frechet(&g.marginals).constraints.len() };
                let constraints = g.constraints[implied..].iter().map(constraint_doc).collect::<Result<Vec<_>>>()?;
                (Some(g.support.dims.clone()), AmbiguityDoc::GenericSubmodular { constraints, marginals: g.marginals.iter().map(marginal_doc).collect() })
            }
            AmbiguitySpec::PodBivariate(s) => {
                let targets = s.targets.as_ref().map(|t| {
                    t.iter()
                        .map(|(pt, &value)| TailTargetDoc {
                            i: pt.i,
                            j: pt.j,
                            ti: s.marginals[pt.i].values[pt.u],
                            tj: s.marginals[pt.j].values[pt.w],
                            value,
                        })
                        .collect()
                });
                (None, AmbiguityDoc::PodBivariate { marginals: s.marginals.iter().map(marginal_doc).collect(), targets })
            }
            AmbiguitySpec::BooleanHigherOrder(s) => {
                let q = s.q.iter().map(|(set, &value)| SubsetTargetDoc { set: set.clone(), value }).collect();
                (None, AmbiguityDoc::BooleanHigherOrder { p: s.p.clone(), m: s.m, q })
            }
            AmbiguitySpec::Moment(s) => {
                let cross = s.cross.iter().map(|(&(i, j), &value)| CrossDoc { i, j, value }).collect();
                (Some(s.support.dims.clone()), AmbiguityDoc::Moment { moments: s.moments.clone(), basis: s.basis.clone(), cross })
            }
        };
        Ok(ProblemDoc { support, objective, ambiguity })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_doc()?).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// One atom of a joint distribution, located by its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub support: Vec<Vec<f64>>,
    pub atoms: Vec<AtomDoc>,
}

impl JointDoc {
    pub fn from_joint(joint: &JointDistribution) -> JointDoc {
        let atoms = joint.mass.iter().map(|(pt, &mass)| AtomDoc { point: joint.support.values(pt), mass }).collect();
        JointDoc { support: joint.support.dims.clone(), atoms }
    }

    /// Atoms at the same point are merged.
    pub fn to_joint(&self) -> Result<JointDistribution> {
        let support = ProductSupport::new(self.support.clone())?;
        let mut mass: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for a in &self.atoms {
            if a.point.len() != support.n() {
                return Err(Error::DimensionMismatch { expected: support.n(), got: a.point.len() });
            }
            let idx = support.indices_of(&a.point).ok_or_else(|| Error::Invalid(format!("atom {:?} is off the lattice", a.point)))?;
            *mass.entry(idx).or_insert(0.0) += a.mass;
        }
        JointDistribution::new(support, mass)
    }
}

pub fn joint_from_json(text: &str) -> Result<JointDistribution> {
    let doc: JointDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_joint()
}

pub fn joint_to_json(joint: &JointDistribution) -> String {
    serde_json::to_string_pretty(&JointDoc::from_joint(joint)).expect("joint documents always serialize")
}

/// Outcome of one bound computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub family: String,
    pub method: String,
    pub value: f64,
    pub iterations: usize,
    pub runtime_ms: f64,
    /// Value of the exponential LP when the run was cross-checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal: Option<JointDoc>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const POD: &str = r#"{
        "objective": {"a": [[1, 0], [0, 1]], "b": [0, 0]},
        "ambiguity": {"kind": "pod_bivariate", "marginals": [
            {"values": [0, 1], "probs": [0.5, 0.5]},
            {"values": [0, 1], "probs": [0.5, 0.5]}
        ]}
    }"#;

    #[test]
    fn parses_every_family() {
        let p = Problem::from_json(POD).unwrap();
        assert_eq!(p.spec.family(), AmbiguitySpec::PodBivariate(PodBivariate::pod(vec![])).family());
        let boolean = r#"{"objective": {"a": [[1, 1]], "b": [0]},
            "ambiguity": {"kind": "boolean_higher_order", "p": [0.3, 0.4], "m": 2, "q": [{"set": [1, 0], "value": 0.2}]}}"#;
        match Problem::from_json(boolean).unwrap().spec {
            AmbiguitySpec::BooleanHigherOrder(s) => assert_eq!(s.q[&vec![0, 1]], 0.2),
            _ => panic!("wrong family"),
        }
        let moment = r#"{"support": [[0, 1], [0, 1]], "objective": {"a": [[1, 1]], "b": [0]},
            "ambiguity": {"kind": "moment", "moments": [[0.5], [0.5]], "cross": [{"i": 0, "j": 1, "value": 0.25}]}}"#;
        assert!(matches!(Problem::from_json(moment).unwrap().spec, AmbiguitySpec::Moment(_)));
        let generic = r#"{"support": [[0, 1], [0, 1]], "objective": {"a": [[1, 0]], "b": [0]},
            "ambiguity": {"kind": "generic_submodular", "marginals": [{"values": [0, 1], "probs": [0.5, 0.5]}, {"values": [0, 1], "probs": [0.5, 0.5]}],
            "constraints": [{"type": "neg_upper_orthant", "i": 0, "j": 1, "ti": 1, "tj": 1, "gamma": -0.25}]}}"#;
        match Problem::from_json(generic).unwrap().spec {
            AmbiguitySpec::GenericSubmodular(g) => assert_eq!(g.constraints.len(), 9),
            _ => panic!("wrong family"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad_probs = POD.replacen("[0.5, 0.5]", "[0.5, 0.4]", 1);
        assert!(matches!(Problem::from_json(&bad_probs), Err(Error::InvalidSpec(_))));
        assert!(matches!(Problem::from_json("{"), Err(Error::Parse(_))));
        let unknown = POD.replace("pod_bivariate", "mystery");
        assert!(matches!(Problem::from_json(&unknown), Err(Error::Parse(_))));
        let moment_without_support = r#"{"objective": {"a": [[1]], "b": [0]}, "ambiguity": {"kind": "moment", "moments": [[0.5]]}}"#;
        assert!(Problem::from_json(moment_without_support).is_err());
        let wrong_width = POD.replace("[[1, 0], [0, 1]]", "[[1, 0, 0], [0, 1, 0]]");
        assert!(Problem::from_json(&wrong_width).is_err());
    }

    #[test]
    fn problem_round_trip() {
        let p = Problem::from_json(POD).unwrap();
        let again = Problem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p.to_doc().unwrap(), again.to_doc().unwrap());
    }

    #[test]
    fn joint_round_trip() {
        let support = ProductSupport::new(vec![vec![0.0, 1.0], vec![-1.0, 2.0, 3.0]]).unwrap();
        let joint = JointDistribution::new(support, BTreeMap::from([(vec![0, 1], 0.25), (vec![1, 2], 0.75)])).unwrap();
        let back = joint_from_json(&joint_to_json(&joint)).unwrap();
        assert_eq!(back.mass, joint.mass);
        assert!(joint_from_json(r#"{"support": [[0, 1]], "atoms": [{"point": [0.5], "mass": 1}]}"#).is_err());
    }
}
