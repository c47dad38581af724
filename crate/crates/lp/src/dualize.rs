//! Solving a tall model through its explicit dual.
//!
//! Each variable is shifted onto a one-sided bound (`x = l + x'` or `x = u - x'`, free
//! variables kept free), so the dual has one row per primal column and one column per
//! primal row, plus one column per finite upper bound on a shifted variable.

use crate::model::{LpModel, RowSense, Sense};
use crate::simplex::{self, RawSolution, RawStatus};
use crate::{LpError, SolverOptions, Transpose};

/// Returns `None` when the dual is infeasible, in which case the primal is either
/// infeasible or unbounded and the caller should solve it directly.
pub(crate) fn solve_via_dual(model: &LpModel, opts: &SolverOptions) -> Result<Option<RawSolution>, LpError> {
    let n = model.num_vars();
    let sign = match model.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let mut shift = vec![0.0; n];
    let mut flip = vec![1.0; n];
    let mut free = vec![false; n];
    let mut width = vec![f64::INFINITY; n];
    for j in 0..n {
        let (l, u) = (model.lower()[j], model.upper()[j]);
        if l.is_finite() {
            shift[j] = l;
            width[j] = u - l;
        } else if u.is_finite() {
            shift[j] = u;
            flip[j] = -1.0;
        } else {
            free[j] = true;
        }
    }

    let mut dual = LpModel::new(Sense::Maximize);
    let mut columns: Vec<Vec<(crate::Var, f64)>> = vec![Vec::new(); n];
    let mut yvars = Vec::with_capacity(model.num_rows());
    for row in model.rows() {
        let shifted: f64 = row.coeffs.iter().map(|&(j, a)| a * shift[j]).sum();
        let (l, u) = match row.sense {
            RowSense::Le => (f64::NEG_INFINITY, 0.0),
            RowSense::Ge => (0.0, f64::INFINITY),
            RowSense::Eq => (f64::NEG_INFINITY, f64::INFINITY),
        };
        let y = dual.add_var(row.rhs - shifted, l, u);
        yvars.push(y);
        for &(j, a) in &row.coeffs {
            columns[j].push((y, flip[j] * a));
        }
    }
    for j in 0..n {
        let mut terms = std::mem::take(&mut columns[j]);
        if width[j].is_finite() {
            let w = dual.add_var(width[j], f64::NEG_INFINITY, 0.0);
            terms.push((w, 1.0));
        }
        let c = flip[j] * sign * model.objective()[j];
        let sense = if free[j] { RowSense::Eq } else { RowSense::Le };
        dual.add_row(terms, sense, c);
    }

    let inner = SolverOptions { transpose: Transpose::Never, ..opts.clone() };
    let sol = simplex::solve_direct(&dual, &inner, None)?;
    match sol.status {
        RawStatus::Infeasible => Ok(None),
        RawStatus::Unbounded => Ok(Some(RawSolution {
            status: RawStatus::Infeasible,
            x: vec![0.0; n],
            y_min: vec![0.0; model.num_rows()],
            iterations: sol.iterations,
            basis: None,
        })),
        RawStatus::Optimal => {
            // The dual is a maximization, so its internal minimization duals are negated
            // shadow prices; the shadow price of dual row j is x'_j.
            let x: Vec<f64> = (0..n)
                .map(|j| {
                    let xp = -sol.y_min[j];
                    let v = shift[j] + flip[j] * xp;
                    v.clamp(model.lower()[j], model.upper()[j])
                })
                .collect();
            let y_min = yvars.iter().map(|v| sol.x[v.idx()]).collect();
            Ok(Some(RawSolution { status: RawStatus::Optimal, x, y_min, iterations: sol.iterations, basis: None }))
        }
    }
}
