use std::fmt;
use std::io::{self, Write};

use crate::LpError;

/// Direction of optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Comparison operator of a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        })
    }
}

/// Handle to a variable of an [`LpModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub(crate) usize);

impl Var {
    pub fn idx(self) -> usize {
        self.0
    }
}

/// Handle to a constraint row of an [`LpModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub(crate) usize);

impl RowId {
    pub fn idx(self) -> usize {
        self.0
    }
}

/// One linear constraint `sum coeffs * x  (<=|=|>=)  rhs`, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A linear program with bounded variables and general constraint rows.
///
/// Bounds may be infinite (`f64::INFINITY` / `f64::NEG_INFINITY`). Rows are stored
/// sparsely; duplicate entries for the same variable within a row are summed when
/// the model is added.
#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    sense: Sense,
    obj: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LpModel {
    pub fn new(sense: Sense) -> Self {
        LpModel {
            sense,
            obj: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Adds a variable with objective coefficient `obj` and bounds `[lower, upper]`.
    pub fn add_var(&mut self, obj: f64, lower: f64, upper: f64) -> Var {
        self.obj.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        Var(self.obj.len() - 1)
    }

    /// Adds a nonnegative variable.
    pub fn add_nonneg(&mut self, obj: f64) -> Var {
        self.add_var(obj, 0.0, f64::INFINITY)
    }

    /// Adds an unbounded variable.
    pub fn add_free(&mut self, obj: f64) -> Var {
        self.add_var(obj, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn set_objective(&mut self, var: Var, coeff: f64) {
        self.obj[var.0] = coeff;
    }

    pub fn set_bounds(&mut self, var: Var, lower: f64, upper: f64) {
        self.lower[var.0] = lower;
        self.upper[var.0] = upper;
    }

    pub fn add_row<I>(&mut self, terms: I, sense: RowSense, rhs: f64) -> RowId
    where
        I: IntoIterator<Item = (Var, f64)>,
    {
        let mut coeffs: Vec<(usize, f64)> = terms.into_iter().map(|(v, a)| (v.0, a)).collect();
        coeffs.sort_by_key(|&(j, _)| j);
        coeffs.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        coeffs.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row { coeffs, sense, rhs });
        RowId(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.obj
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, id: RowId) -> &Row {
        &self.rows[id.0]
    }

    /// Number of stored nonzero constraint coefficients.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    /// Evaluates the objective at `x`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Row activity `a_i' x`.
    pub fn activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Returns a copy with rows reordered by `perm` (row `k` of the result is row `perm[k]`).
    pub fn permute_rows(&self, perm: &[usize]) -> LpModel {
        let mut out = self.clone();
        out.rows = perm.iter().map(|&k| self.rows[k].clone()).collect();
        out
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for (j, ((&c, &l), &u)) in self.obj.iter().zip(&self.lower).zip(&self.upper).enumerate() {
            if c.is_nan() || !c.is_finite() {
                return Err(LpError::InvalidModel(format!("objective coefficient of x{j} is {c}")));
            }
            if l.is_nan() || u.is_nan() {
                return Err(LpError::InvalidModel(format!("NaN bound on x{j}")));
            }
            if l > u {
                return Err(LpError::InvalidModel(format!("x{j} has lower bound {l} above upper bound {u}")));
            }
            if l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!("x{j} has an empty bound interval")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!("row {i} has non-finite rhs {}", row.rhs)));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::InvalidModel(format!(
                        "row {i} references variable {j} but the model has {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidModel(format!("row {i} has coefficient {a} on x{j}")));
                }
            }
        }
        Ok(())
    }

    /// Writes the model in CPLEX LP text format, for cross-checking with external solvers.
    pub fn write_lp_format<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "\\ generated by sharpbound-lp")?;
        writeln!(
            w,
            "{}",
            match self.sense {
                Sense::Minimize => "Minimize",
                Sense::Maximize => "Maximize",
            }
        )?;
        write!(w, " obj:")?;
        let terms: Vec<(usize, f64)> =
            self.obj.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(j, &c)| (j, c)).collect();
        write_terms(&mut w, &terms)?;
        writeln!(w)?;
        writeln!(w, "Subject To")?;
        for (i, row) in self.rows.iter().enumerate() {
            write!(w, " r{i}:")?;
            write_terms(&mut w, &row.coeffs)?;
            writeln!(w, " {} {}", row.sense, fmt_num(row.rhs))?;
        }
        writeln!(w, "Bounds")?;
        for j in 0..self.num_vars() {
            let (l, u) = (self.lower[j], self.upper[j]);
            match (l.is_finite(), u.is_finite()) {
                (true, true) if l == u => writeln!(w, " x{j} = {}", fmt_num(l))?,
                (true, true) => writeln!(w, " {} <= x{j} <= {}", fmt_num(l), fmt_num(u))?,
                (true, false) if l == 0.0 => {}
                (true, false) => writeln!(w, " x{j} >= {}", fmt_num(l))?,
                (false, true) => writeln!(w, " -inf <= x{j} <= {}", fmt_num(u))?,
                (false, false) => writeln!(w, " x{j} free")?,
            }
        }
        writeln!(w, "End")
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn write_terms<W: Write>(w: &mut W, terms: &[(usize, f64)]) -> io::Result<()> {
    if terms.is_empty() {
        return write!(w, " 0 x0");
    }
    for &(j, a) in terms {
        if a < 0.0 {
            write!(w, " - {} x{j}", fmt_num(-a))?;
        } else {
            write!(w, " + {} x{j}", fmt_num(a))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_terms_are_merged() {
        let mut m = LpModel::new(Sense::Maximize);
        let x = m.add_nonneg(1.0);
        let y = m.add_nonneg(1.0);
        m.add_row([(x, 1.0), (y, 2.0), (x, 3.0), (y, -2.0)], RowSense::Le, 4.0);
        assert_eq!(m.rows()[0].coeffs, vec![(0, 4.0)]);
    }

    #[test]
    fn validation_rejects_nan_and_bad_refs() {
        let mut m = LpModel::new(Sense::Minimize);
        let x = m.add_nonneg(1.0);
        m.add_row([(x, f64::NAN)], RowSense::Le, 1.0);
        assert!(m.validate().is_err());

        let mut m = LpModel::new(Sense::Minimize);
        m.add_nonneg(1.0);
        m.rows.push(Row { coeffs: vec![(3, 1.0)], sense: RowSense::Eq, rhs: 0.0 });
        assert!(m.validate().is_err());

        let mut m = LpModel::new(Sense::Minimize);
        m.add_var(0.0, 2.0, 1.0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn lp_format_dump() {
        let mut m = LpModel::new(Sense::Maximize);
        let x = m.add_nonneg(1.0);
        let y = m.add_var(-2.0, -1.0, 3.0);
        let z = m.add_free(0.0);
        m.add_row([(x, 1.0), (y, -1.0)], RowSense::Le, 2.0);
        m.add_row([(z, 1.0)], RowSense::Eq, 0.5);
        let mut buf = Vec::new();
        m.write_lp_format(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("Maximize"));
        assert!(text.contains(" obj: + 1.0 x0 - 2.0 x1"));
        assert!(text.contains(" r0: + 1.0 x0 - 1.0 x1 <= 2.0"));
        assert!(text.contains(" -1.0 <= x1 <= 3.0"));
        assert!(text.contains(" x2 free"));
        assert!(text.ends_with("End\n"));
    }
}
