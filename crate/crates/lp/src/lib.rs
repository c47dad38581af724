//! A self-contained linear-programming kernel.
//!
//! Models are built with [`LpModel`] and solved with [`solve_lp`], which runs a
//! bounded-variable revised primal simplex and returns primal values, row duals,
//! reduced costs and an optimality [`Certificate`] recomputed on the original model.
//! Tall models (many more rows than columns) are solved through their explicit dual.

mod certificate;
mod dualize;
mod factor;
mod model;
mod simplex;

pub use certificate::{certify, Certificate};
pub use model::{LpModel, Row, RowId, RowSense, Sense, Var};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// When to solve the explicit dual instead of the model itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transpose {
    /// Dualize when the model has more than twice as many rows as columns.
    Auto,
    Never,
    Always,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// Phase-one objective above this (relative to the largest rhs) means infeasible.
    pub infeasibility_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// Pivots between rebuilds of the basis inverse.
    pub refactor_period: usize,
    pub transpose: Transpose,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 1_000_000,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            infeasibility_tol: 1e-8,
            bland_after: 500,
            refactor_period: 100,
            transpose: Transpose::Auto,
        }
    }
}

/// Position of a column (or of a row's slack) relative to the basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column held at zero.
    Free,
}

/// Final basis of a solve, reusable as a starting point for a related model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub vars: Vec<BasisStatus>,
    pub rows: Vec<BasisStatus>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values (meaningful only when optimal).
    pub x: Vec<f64>,
    /// Shadow price of each row: the rate of change of the optimal objective with its rhs.
    pub duals: Vec<f64>,
    /// `c - A' duals`, in the model's own objective sense.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
    /// Optimal basis, when the model was solved directly rather than through its dual.
    pub basis: Option<Basis>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, v: Var) -> f64 {
        self.x[v.idx()]
    }

    pub fn dual(&self, r: RowId) -> f64 {
        self.duals[r.idx()]
    }
}

/// Anything that can solve an [`LpModel`]. Callers go through this trait so an external
/// solver can be substituted.
pub trait LpSolver: Send + Sync {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError>;
}

/// The built-in simplex solver.
#[derive(Clone, Debug, Default)]
pub struct SimplexSolver {
    pub options: SolverOptions,
}

impl LpSolver for SimplexSolver {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError> {
        solve_lp_with(model, &self.options)
    }
}

/// Solves `model` with default options.
pub fn solve_lp(model: &LpModel) -> Result<LpSolution, LpError> {
    solve_lp_with(model, &SolverOptions::default())
}

/// Solves `model` directly, starting from `warm`, the basis of a model that shares a
/// prefix of its columns and rows. Statuses beyond that prefix default to basic slacks
/// for rows and a finite bound for columns.
pub fn solve_lp_warm(model: &LpModel, opts: &SolverOptions, warm: &Basis) -> Result<LpSolution, LpError> {
    model.validate()?;
    let raw = simplex::solve_direct(model, opts, Some(warm))?;
    finish(model, raw)
}

pub fn solve_lp_with(model: &LpModel, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    model.validate()?;
    let n = model.num_vars();
    let m = model.num_rows();
    let use_dual = match opts.transpose {
        Transpose::Never => false,
        Transpose::Always => m > 0 && n > 0,
        Transpose::Auto => m > 2 * n && n > 0,
    };
    let raw = if use_dual {
        match dualize::solve_via_dual(model, opts)? {
            Some(raw) => raw,
            None => simplex::solve_direct(model, opts, None)?,
        }
    } else {
        simplex::solve_direct(model, opts, None)?
    };
    finish(model, raw)
}

fn finish(model: &LpModel, raw: simplex::RawSolution) -> Result<LpSolution, LpError> {
    let (n, m) = (model.num_vars(), model.num_rows());

    let sign = match model.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let status = match raw.status {
        simplex::RawStatus::Optimal => LpStatus::Optimal,
        simplex::RawStatus::Infeasible => LpStatus::Infeasible,
        simplex::RawStatus::Unbounded => LpStatus::Unbounded,
    };
    if status != LpStatus::Optimal {
        let objective = match status {
            LpStatus::Unbounded => -sign * f64::INFINITY,
            _ => f64::NAN,
        };
        return Ok(LpSolution {
            status,
            x: raw.x,
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            objective,
            iterations: raw.iterations,
            certificate: None,
            basis: None,
        });
    }
    let duals: Vec<f64> = raw.y_min.iter().map(|y| sign * y).collect();
    let reduced_costs = certificate::reduced_costs(model, &duals);
    let cert = certify(model, &raw.x, &duals);
    Ok(LpSolution {
        status,
        objective: model.objective_value(&raw.x),
        x: raw.x,
        duals,
        reduced_costs,
        iterations: raw.iterations,
        certificate: Some(cert),
        basis: raw.basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_free_variable_above_one() {
        let mut m = LpModel::new(Sense::Minimize);
        let x = m.add_free(1.0);
        m.add_row([(x, 1.0)], RowSense::Ge, 1.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value(x) - 1.0).abs() < 1e-12);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_with_redundant_row_reports_binding_dual() {
        let mut m = LpModel::new(Sense::Maximize);
        let x = m.add_free(1.0);
        let r3 = m.add_row([(x, 1.0)], RowSense::Le, 3.0);
        let r2 = m.add_row([(x, 1.0)], RowSense::Le, 2.0);
        let s = solve_lp_with(&m, &SolverOptions { transpose: Transpose::Never, ..Default::default() }).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value(x) - 2.0).abs() < 1e-12);
        assert!((s.dual(r2) - 1.0).abs() < 1e-12);
        assert!(s.dual(r3).abs() < 1e-12);
        // same model through the dual path
        let s = solve_lp_with(&m, &SolverOptions { transpose: Transpose::Always, ..Default::default() }).unwrap();
        assert!((s.value(x) - 2.0).abs() < 1e-12);
        assert!((s.dual(r2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = LpModel::new(Sense::Maximize);
        let x = m.add_free(1.0);
        m.add_row([(x, 1.0)], RowSense::Ge, 0.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        assert_eq!(s.objective, f64::INFINITY);
    }

    #[test]
    fn infeasible_detected_both_paths() {
        for t in [Transpose::Never, Transpose::Always] {
            let mut m = LpModel::new(Sense::Minimize);
            let x = m.add_nonneg(1.0);
            let y = m.add_nonneg(1.0);
            m.add_row([(x, 1.0), (y, 1.0)], RowSense::Le, 1.0);
            m.add_row([(x, 1.0), (y, 1.0)], RowSense::Ge, 2.0);
            let s = solve_lp_with(&m, &SolverOptions { transpose: t, ..Default::default() }).unwrap();
            assert_eq!(s.status, LpStatus::Infeasible, "{t:?}");
        }
    }

    #[test]
    fn boxed_variables_and_equalities() {
        // max 3x + 2y - z, x + y + z = 4, x - y >= -1, 0<=x<=2, 0<=y<=3, z in [-1, 5]
        let mut m = LpModel::new(Sense::Maximize);
        let x = m.add_var(3.0, 0.0, 2.0);
        let y = m.add_var(2.0, 0.0, 3.0);
        let z = m.add_var(-1.0, -1.0, 5.0);
        m.add_row([(x, 1.0), (y, 1.0), (z, 1.0)], RowSense::Eq, 4.0);
        m.add_row([(x, 1.0), (y, -1.0)], RowSense::Ge, -1.0);
        for t in [Transpose::Never, Transpose::Always] {
            let s = solve_lp_with(&m, &SolverOptions { transpose: t, ..Default::default() }).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            // x=2, y=3, z=-1 -> 6 + 6 + 1 = 13
            assert!((s.objective - 13.0).abs() < 1e-9, "{t:?}: {}", s.objective);
            let c = s.certificate.unwrap();
            assert!(c.is_valid(s.objective), "{c:?}");
        }
    }

    #[test]
    fn empty_model() {
        let mut m = LpModel::new(Sense::Minimize);
        let x = m.add_var(2.0, -1.0, 1.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value(x), -1.0);
    }

    #[test]
    fn iteration_cap_surfaces_as_error() {
        let mut m = LpModel::new(Sense::Maximize);
        let vars: Vec<Var> = (0..5).map(|_| m.add_nonneg(1.0)).collect();
        for (k, &v) in vars.iter().enumerate() {
            m.add_row([(v, 1.0)], RowSense::Le, k as f64 + 1.0);
        }
        let opts = SolverOptions { max_iterations: 1, transpose: Transpose::Never, ..Default::default() };
        assert!(matches!(solve_lp_with(&m, &opts), Err(LpError::IterationLimit(_))));
    }
}
