use crate::model::{LpModel, RowSense, Sense};

/// Optimality evidence for a primal/dual pair, measured on the original model.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Largest row violation (scaled by the row's largest coefficient) or bound violation.
    pub primal_residual: f64,
    /// Largest dual sign violation, on rows or on reduced costs of variables lacking the
    /// bound that would justify them.
    pub dual_residual: f64,
    /// Largest product of a dual value with the slack it prices.
    pub complementarity: f64,
    pub dual_objective: f64,
    /// `|primal objective - dual objective|`.
    pub gap: f64,
}

impl Certificate {
    pub const PRIMAL_TOL: f64 = 1e-7;
    pub const COMPLEMENTARITY_TOL: f64 = 1e-6;
    pub const GAP_TOL: f64 = 1e-6;

    pub fn is_valid(&self, objective: f64) -> bool {
        self.primal_residual <= Self::PRIMAL_TOL
            && self.dual_residual <= Self::COMPLEMENTARITY_TOL
            && self.complementarity <= Self::COMPLEMENTARITY_TOL
            && self.gap <= Self::GAP_TOL * (1.0 + objective.abs())
    }
}

/// `c - A' y` with `y` the shadow prices.
pub(crate) fn reduced_costs(model: &LpModel, duals: &[f64]) -> Vec<f64> {
    let mut d = model.objective().to_vec();
    for (row, &y) in model.rows().iter().zip(duals) {
        if y == 0.0 {
            continue;
        }
        for &(j, a) in &row.coeffs {
            d[j] -= a * y;
        }
    }
    d
}

/// Builds a [`Certificate`] for primal point `x` and row shadow prices `duals`.
pub fn certify(model: &LpModel, x: &[f64], duals: &[f64]) -> Certificate {
    // Work in minimization form: y_min = sign * shadow, c_min = sign * c.
    let sign = match model.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut primal_residual = 0.0f64;
    let mut dual_residual = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut dual_obj = 0.0;

    for (i, row) in model.rows().iter().enumerate() {
        let act = model.activity(i, x);
        let scale = row.coeffs.iter().fold(1.0f64, |acc, &(_, a)| acc.max(a.abs()));
        let viol = match row.sense {
            RowSense::Le => (act - row.rhs).max(0.0),
            RowSense::Ge => (row.rhs - act).max(0.0),
            RowSense::Eq => (act - row.rhs).abs(),
        };
        primal_residual = primal_residual.max(viol / scale);
        let y = sign * duals[i];
        let wrong_sign = match row.sense {
            RowSense::Le => y.max(0.0),
            RowSense::Ge => (-y).max(0.0),
            RowSense::Eq => 0.0,
        };
        dual_residual = dual_residual.max(wrong_sign);
        if row.sense != RowSense::Eq {
            complementarity = complementarity.max(y.abs() * (act - row.rhs).abs());
        }
        dual_obj += row.rhs * y;
    }

    let d = reduced_costs(model, duals);
    for j in 0..model.num_vars() {
        let (l, u) = (model.lower()[j], model.upper()[j]);
        primal_residual = primal_residual.max((l - x[j]).max(0.0)).max((x[j] - u).max(0.0));
        let dj = sign * d[j];
        if dj > 0.0 {
            if l.is_finite() {
                dual_obj += l * dj;
                complementarity = complementarity.max(dj * (x[j] - l).abs());
            } else {
                dual_residual = dual_residual.max(dj);
            }
        } else if dj < 0.0 {
            if u.is_finite() {
                dual_obj += u * dj;
                complementarity = complementarity.max(-dj * (u - x[j]).abs());
            } else {
                dual_residual = dual_residual.max(-dj);
            }
        }
    }
    let primal_min = sign * model.objective_value(x);
    Certificate {
        primal_residual,
        dual_residual,
        complementarity,
        dual_objective: sign * dual_obj,
        gap: (primal_min - dual_obj).abs(),
    }
}
