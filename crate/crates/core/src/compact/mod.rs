//! Polynomial-size LPs for structured ambiguity sets and extraction of their extremal
//! mixtures of comonotone couplings.

mod boolean;
mod dual_dro;
mod extract;
mod hunter;
mod moment;
mod pod;

use std::collections::BTreeMap;

use sharpbound_lp::{solve_lp, solve_lp_warm, Basis, LpError, LpModel, LpSolution, LpStatus, SolverOptions, Var};

use crate::error::{Error, Result};
use crate::genbound::BoundResult;

pub use boolean::{boolean_model, expand_rank_objective, solve_boolean_higher_order, MAX_PIECES};
pub use dual_dro::{build_dual_dro, solve_dual_dro, DualDroModel};
pub use extract::extract_extremal;
pub use hunter::hunter_worsley;
pub use moment::{moment_model, solve_moment, solve_moment_from};
pub use pod::{pod_model, solve_pod_bivariate};

/// Tolerance of the [`CompactSolution`] invariants.
pub const SOLUTION_TOL: f64 = 1e-8;
/// Mixture components lighter than this are dropped by extraction.
pub const LAMBDA_CUTOFF: f64 = 1e-10;

/// Primal variables of a compact LP.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompactSolution {
    /// `λ_k`, the probability that piece `k` is selected.
    pub lambda: Vec<f64>,
    /// `gamma_uni[i][k][v] = P(ξ_i = Ξ_i[v], piece k)`. For Boolean specs the two entries
    /// are `[λ_k - γ_ik, γ_ik]`.
    pub gamma_uni: Vec<Vec<Vec<f64>>>,
    /// Bivariate variables keyed by `(i, j)`, indexed `[k][u][w]`: joint upper-tail
    /// masses for POD specs (zero away from targets), joint point masses for moment specs.
    pub gamma_pair: BTreeMap<(usize, usize), Vec<Vec<Vec<f64>>>>,
    /// Boolean `γ_{I,k}` keyed by the sorted subset.
    pub gamma_subset: BTreeMap<Vec<usize>, Vec<f64>>,
}

impl CompactSolution {
    /// Invariant violations: `Σλ = 1`, nonnegativity and `Σ_v γ_ik(v) = λ_k`.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        let total: f64 = self.lambda.iter().sum();
        if (total - 1.0).abs() > SOLUTION_TOL {
            out.push(format!("mixture weights sum to {total}"));
        }
        let negative = self
            .lambda
            .iter()
            .chain(self.gamma_uni.iter().flatten().flatten())
            .chain(self.gamma_pair.values().flatten().flatten().flatten())
            .chain(self.gamma_subset.values().flatten())
            .any(|&v| v < -1e-9);
        if negative {
            out.push("negative component".into());
        }
        for (i, gi) in self.gamma_uni.iter().enumerate() {
            if gi.len() != self.lambda.len() {
                out.push(format!("dimension {i} has {} pieces, expected {}", gi.len(), self.lambda.len()));
                continue;
            }
            for (k, gik) in gi.iter().enumerate() {
                let s: f64 = gik.iter().sum();
                if (s - self.lambda[k]).abs() > SOLUTION_TOL {
                    out.push(format!("conditional mass of dimension {i}, piece {k} is {s}, expected {}", self.lambda[k]));
                }
            }
        }
        out
    }
}

/// Solves and insists on an optimal, certified solution.
pub(crate) fn solve_certified(model: &LpModel, what: &str) -> Result<LpSolution> {
    solve_certified_from(model, what, None)
}

/// As [`solve_certified`], starting from `warm` when given. A warm start that fails or
/// ends without a certified optimum is retried cold.
pub(crate) fn solve_certified_from(model: &LpModel, what: &str, warm: Option<&Basis>) -> Result<LpSolution> {
    let warm_sol = warm.and_then(|b| solve_lp_warm(model, &SolverOptions::default(), b).ok()).filter(|s| {
        s.status == LpStatus::Optimal && s.certificate.as_ref().is_some_and(|c| c.is_valid(s.objective))
    });
    let sol = match warm_sol {
        Some(s) => s,
        None => solve_lp(model)?,
    };
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible(format!("{what} LP is infeasible"))),
        LpStatus::Unbounded => return Err(Error::Unbounded(format!("{what} LP"))),
    }
    if let Some(cert) = &sol.certificate {
        if !cert.is_valid(sol.objective) {
            return Err(Error::Lp(LpError::NumericalFailure(format!("{what} LP certificate failed: {cert:?}"))));
        }
    }
    Ok(sol)
}

/// The `λ_k` and `γ_ik(v)` blocks shared by all compact LPs.
pub(crate) struct UniBlock {
    pub lambda: Vec<Var>,
    /// `[i][k][v]`
    pub gamma: Vec<Vec<Vec<Var>>>,
}

impl UniBlock {
    pub(crate) fn values(&self, sol: &LpSolution) -> (Vec<f64>, Vec<Vec<Vec<f64>>>) {
        let lambda = self.lambda.iter().map(|&v| sol.value(v)).collect();
        let gamma = self
            .gamma
            .iter()
            .map(|gi| gi.iter().map(|gik| gik.iter().map(|&v| sol.value(v)).collect()).collect())
            .collect();
        (lambda, gamma)
    }
}

pub(crate) fn bound(value: f64, iterations: usize) -> BoundResult {
    BoundResult { value, dual: None, cuts: Vec::new(), extremal: None, iterations }
}
