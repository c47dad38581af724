use std::collections::BTreeMap;

use super::{CompactSolution, LAMBDA_CUTOFF};
use crate::comonotone::comonotone_atoms;
use crate::error::{Error, Result};
use crate::types::{AmbiguitySpec, JointDistribution, PiecewiseAffineObjective};

/// Mixture over pieces `k` (weight `λ_k`) of the comonotone coupling of the conditional
/// marginals `γ_ik(·) / λ_k`.
pub fn extract_extremal(spec: &AmbiguitySpec, obj: &PiecewiseAffineObjective, sol: &CompactSolution) -> Result<JointDistribution> {
    if matches!(spec, AmbiguitySpec::GenericSubmodular(_)) {
        return Err(Error::Invalid("generic specs carry their extremal distribution in the bound result".into()));
    }
    let support = spec.support();
    let n = support.n();
    if obj.n() != n || obj.k() != sol.lambda.len() || sol.gamma_uni.len() != n {
        return Err(Error::Invalid("solution does not match the specification and objective".into()));
    }
    if sol.gamma_uni.iter().enumerate().any(|(i, g)| g.iter().any(|gik| gik.len() != support.dim_len(i))) {
        return Err(Error::Invalid("solution does not match the support".into()));
    }
    let issues = sol.issues();
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(issues));
    }
    let mut mass: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (k, &lambda) in sol.lambda.iter().enumerate() {
        if lambda <= LAMBDA_CUTOFF {
            continue;
        }
        let conditional: Vec<Vec<f64>> = (0..n).map(|i| sol.gamma_uni[i][k].iter().map(|v| v.max(0.0)).collect()).collect();
        if conditional.iter().any(|c| c.iter().sum::<f64>() <= 0.0) {
            return Err(Error::Invalid(format!("piece {k} has weight {lambda} but an empty conditional marginal")));
        }
        for (point, m) in comonotone_atoms(&conditional) {
            *mass.entry(point).or_insert(0.0) += lambda * m;
        }
    }
    Ok(JointDistribution { support, mass })
}
