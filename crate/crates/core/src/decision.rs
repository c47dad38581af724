//! Decision sets and decision-dependent objectives for the robust optimization solvers.

use serde::{Deserialize, Serialize};
use sharpbound_lp::{LpModel, RowSense, Var};

use crate::error::{Error, Result};
use crate::types::PiecewiseAffineObjective;

/// A bounded polyhedron `{x : lower ≤ x ≤ upper, rows}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<(Vec<f64>, RowSense, f64)>,
}

impl Polyhedron {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let p = Polyhedron { lower, upper, rows: Vec::new() };
        p.check()?;
        Ok(p)
    }

    pub fn unit_box(d: usize) -> Self {
        Polyhedron { lower: vec![0.0; d], upper: vec![1.0; d], rows: Vec::new() }
    }

    pub fn singleton(x: &[f64]) -> Self {
        Polyhedron { lower: x.to_vec(), upper: x.to_vec(), rows: Vec::new() }
    }

    pub fn with_row(mut self, coeffs: Vec<f64>, sense: RowSense, rhs: f64) -> Self {
        self.rows.push((coeffs, sense, rhs));
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Rejects unbounded or malformed sets; emptiness is left to the LP.
    pub fn check(&self) -> Result<()> {
        let d = self.dim();
        if self.upper.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.upper.len() });
        }
        if self.lower.iter().chain(&self.upper).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("decision set must have finite bounds".into()));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return Err(Error::Infeasible("decision set has crossed bounds".into()));
        }
        for (coeffs, _, rhs) in &self.rows {
            if coeffs.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: coeffs.len() });
            }
            if coeffs.iter().any(|v| !v.is_finite()) || !rhs.is_finite() {
                return Err(Error::Invalid("decision set row is not finite".into()));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| *v >= l - tol && *v <= u + tol)
            && self.rows.iter().all(|(c, s, r)| {
                let act: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
                match s {
                    RowSense::Le => act <= r + tol,
                    RowSense::Ge => act >= r - tol,
                    RowSense::Eq => (act - r).abs() <= tol,
                }
            })
    }

    /// Adds one variable per coordinate plus the defining rows.
    pub(crate) fn add_to(&self, model: &mut LpModel) -> Vec<Var> {
        let vars: Vec<Var> = self.lower.iter().zip(&self.upper).map(|(&l, &u)| model.add_var(0.0, l, u)).collect();
        for (coeffs, sense, rhs) in &self.rows {
            model.add_row(vars.iter().zip(coeffs).map(|(&v, &c)| (v, c)), *sense, *rhs);
        }
        vars
    }
}

/// Pieces `a_k(x)'ξ + b_k(x)` whose coefficients are affine in the decision `x`:
/// `a_{k,i}(x) = a0[k][i] + Σ_m ax[k][i][m] x_m` and `b_k(x) = b0[k] + Σ_m bx[k][m] x_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePieces {
    pub a0: Vec<Vec<f64>>,
    pub ax: Vec<Vec<Vec<f64>>>,
    pub b0: Vec<f64>,
    pub bx: Vec<Vec<f64>>,
}

impl AffinePieces {
    pub fn new(a0: Vec<Vec<f64>>, ax: Vec<Vec<Vec<f64>>>, b0: Vec<f64>, bx: Vec<Vec<f64>>) -> Result<Self> {
        let p = AffinePieces { a0, ax, b0, bx };
        p.check()?;
        Ok(p)
    }

    /// Pieces that do not depend on a decision of dimension `d`.
    pub fn constant(obj: &PiecewiseAffineObjective, d: usize) -> Self {
        AffinePieces {
            a0: obj.a.clone(),
            ax: vec![vec![vec![0.0; d]; obj.n()]; obj.k()],
            b0: obj.b.clone(),
            bx: vec![vec![0.0; d]; obj.k()],
        }
    }

    pub fn k(&self) -> usize {
        self.b0.len()
    }

    pub fn n(&self) -> usize {
        self.a0.first().map_or(0, Vec::len)
    }

    pub fn dim(&self) -> usize {
        self.bx.first().map_or(0, Vec::len)
    }

    pub fn check(&self) -> Result<()> {
        let (k, n, d) = (self.k(), self.n(), self.dim());
        if k == 0 {
            return Err(Error::Invalid("at least one piece is required".into()));
        }
        let shapes_ok = self.a0.len() == k
            && self.ax.len() == k
            && self.bx.len() == k
            && self.a0.iter().all(|r| r.len() == n)
            && self.ax.iter().all(|r| r.len() == n && r.iter().all(|c| c.len() == d))
            && self.bx.iter().all(|r| r.len() == d);
        if !shapes_ok {
            return Err(Error::Invalid("affine pieces have inconsistent shapes".into()));
        }
        let finite = self.a0.iter().flatten().chain(self.ax.iter().flatten().flatten()).chain(&self.b0).chain(self.bx.iter().flatten());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("affine pieces have non-finite coefficients".into()));
        }
        Ok(())
    }

    /// The objective at a fixed decision.
    pub fn at(&self, x: &[f64]) -> PiecewiseAffineObjective {
        let dot = |c: &[f64]| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let a = (0..self.k()).map(|k| (0..self.n()).map(|i| self.a0[k][i] + dot(&self.ax[k][i])).collect()).collect();
        let b = (0..self.k()).map(|k| self.b0[k] + dot(&self.bx[k])).collect();
        PiecewiseAffineObjective { a, b }
    }
}
