//! Bounded-variable revised primal simplex.
//!
//! The model is brought to the form `min c'x, A x + s = b, l <= (x, s) <= u` where
//! every row owns a logical column `s_i` whose bounds encode the row sense. Rows whose
//! logical cannot start feasible get an artificial column; phase one drives those to
//! zero. The basis inverse is held in product form as a list of sparse eta columns,
//! rebuilt periodically by elimination from the identity. Pricing uses Devex
//! reference weights.

use crate::model::{LpModel, RowSense, Sense};
use crate::{Basis, BasisStatus, LpError, SolverOptions};
use crate::factor::Pfi;

const NONE: usize = usize::MAX;
/// Devex weights are reset to one once any of them passes this.
const DEVEX_RESET: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RawStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a direct solve, in the caller's variable space.
#[derive(Clone, Debug)]
pub(crate) struct RawSolution {
    pub status: RawStatus,
    pub x: Vec<f64>,
    /// Row duals for the minimization form (`d obj_min / d b_i`), unscaled.
    pub y_min: Vec<f64>,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

enum Step {
    Flip(f64),
    Pivot { row: usize, theta: f64, to_upper: bool },
    Unbounded,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex {
    m: usize,
    n_struct: usize,
    ncols: usize,
    // column-wise storage of [A | I | artificials]
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    // row-wise storage of the same matrix
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    phase2_cost: Vec<f64>,
    cost: Vec<f64>,
    artificial_start: usize,

    basis: Vec<usize>,
    pos: Vec<usize>,
    state: Vec<State>,
    x: Vec<f64>,
    inv: Pfi,
    d: Vec<f64>,
    /// Devex reference weights for pricing.
    weights: Vec<f64>,

    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,

    feas_tol: f64,
    opt_tol: f64,
    piv_tol: f64,
    max_iterations: usize,
    refactor_period: usize,
    bland_after: usize,

    // scratch
    alpha: Vec<f64>,
    rho: Vec<f64>,
    pi: Vec<f64>,
    touched: Vec<usize>,
}

fn pow2_scale(max_abs: f64) -> f64 {
    if max_abs == 0.0 || !max_abs.is_finite() {
        1.0
    } else {
        (2.0f64).powi(-(max_abs.log2().round() as i32))
    }
}

pub(crate) fn solve_direct(model: &LpModel, opts: &SolverOptions, warm: Option<&Basis>) -> Result<RawSolution, LpError> {
    let m = model.num_rows();
    let n = model.num_vars();
    let sign = match model.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    // Row equilibration by powers of two keeps the scaled data exact.
    let row_scale: Vec<f64> = model
        .rows()
        .iter()
        .map(|r| pow2_scale(r.coeffs.iter().fold(0.0f64, |acc, &(_, a)| acc.max(a.abs()))))
        .collect();

    let mut lower = model.lower().to_vec();
    let mut upper = model.upper().to_vec();
    let mut cost: Vec<f64> = model.objective().iter().map(|c| sign * c).collect();
    let b: Vec<f64> = model.rows().iter().zip(&row_scale).map(|(r, s)| r.rhs * s).collect();

    // Structural columns, transposed from the row storage.
    let mut counts = vec![0usize; n];
    for r in model.rows() {
        for &(j, _) in &r.coeffs {
            counts[j] += 1;
        }
    }
    let mut col_start = Vec::with_capacity(n + 2 * m + 1);
    col_start.push(0);
    for j in 0..n {
        col_start.push(col_start[j] + counts[j]);
    }
    let nnz_struct = col_start[n];
    let mut col_row = vec![0usize; nnz_struct];
    let mut col_val = vec![0.0f64; nnz_struct];
    let mut fill = col_start[..n].to_vec();
    for (i, r) in model.rows().iter().enumerate() {
        for &(j, a) in &r.coeffs {
            col_row[fill[j]] = i;
            col_val[fill[j]] = a * row_scale[i];
            fill[j] += 1;
        }
    }

    // Logical columns.
    for (i, r) in model.rows().iter().enumerate() {
        col_row.push(i);
        col_val.push(1.0);
        col_start.push(col_row.len());
        let (l, u) = match r.sense {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Ge => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => (0.0, 0.0),
        };
        lower.push(l);
        upper.push(u);
        cost.push(0.0);
    }

    let ncols = n + m;
    let cost_scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let mut s = Simplex {
        m,
        n_struct: n,
        ncols,
        col_start,
        col_row,
        col_val,
        row_start: Vec::new(),
        row_col: Vec::new(),
        row_val: Vec::new(),
        b,
        lower,
        upper,
        phase2_cost: cost,
        cost: vec![0.0; ncols],
        artificial_start: ncols,
        basis: vec![NONE; m],
        pos: vec![NONE; ncols],
        state: vec![State::Lower; ncols],
        x: vec![0.0; ncols],
        inv: Pfi::default(),
        d: vec![0.0; ncols],
        weights: vec![1.0; ncols],
        iterations: 0,
        since_refactor: 0,
        degenerate_run: 0,
        feas_tol: opts.feasibility_tol,
        opt_tol: opts.optimality_tol * cost_scale,
        piv_tol: opts.pivot_tol,
        max_iterations: opts.max_iterations,
        refactor_period: opts.refactor_period.max(1),
        bland_after: opts.bland_after,
        alpha: vec![0.0; m],
        rho: vec![0.0; m],
        pi: vec![0.0; ncols],
        touched: Vec::new(),
    };
    s.rebuild_rows();
    match warm {
        Some(w) => s.warm_start(w)?,
        None => s.cold_start(),
    }

    if s.ncols > s.artificial_start {
        // Phase one: minimize the sum of artificials.
        for j in s.artificial_start..s.ncols {
            s.cost[j] = 1.0;
        }
        let saved_opt = s.opt_tol;
        s.opt_tol = opts.optimality_tol;
        s.recompute_duals();
        match s.run()? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => {
                return Err(LpError::NumericalFailure("phase one reported unboundedness".into()));
            }
        }
        s.opt_tol = saved_opt;
        let infeas: f64 = (s.artificial_start..s.ncols).map(|j| s.x[j]).sum();
        let bscale = s.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if infeas > opts.infeasibility_tol * bscale {
            return Ok(RawSolution {
                status: RawStatus::Infeasible,
                x: s.x[..n].to_vec(),
                y_min: vec![0.0; m],
                iterations: s.iterations,
                basis: None,
            });
        }
        for j in s.artificial_start..s.ncols {
            s.upper[j] = 0.0;
            if s.state[j] != State::Basic {
                s.x[j] = 0.0;
                s.state[j] = State::Lower;
            }
        }
    }

    s.cost = s.phase2_cost.clone();
    s.recompute_duals();
    let end = s.run()?;
    if let PhaseEnd::Unbounded = end {
        return Ok(RawSolution {
            status: RawStatus::Unbounded,
            x: s.x[..n].to_vec(),
            y_min: vec![0.0; m],
            iterations: s.iterations,
            basis: None,
        });
    }

    let y = s.row_duals();
    let y_min = y.iter().zip(&row_scale).map(|(v, sc)| v * sc).collect();
    let mut xs = s.x[..n].to_vec();
    for j in 0..n {
        // snap to bounds that were hit within tolerance
        if xs[j] < s.lower[j] {
            xs[j] = s.lower[j];
        }
        if xs[j] > s.upper[j] {
            xs[j] = s.upper[j];
        }
    }
    let basis = Some(s.export_basis());
    Ok(RawSolution { status: RawStatus::Optimal, x: xs, y_min, iterations: s.iterations, basis })
}

impl Simplex {
    /// Row-wise copy of the column storage.
    fn rebuild_rows(&mut self) {
        let m = self.m;
        let mut start = vec![0usize; m + 1];
        for &i in &self.col_row {
            start[i + 1] += 1;
        }
        for i in 0..m {
            start[i + 1] += start[i];
        }
        let mut fill = start[..m].to_vec();
        self.row_col = vec![0; self.col_row.len()];
        self.row_val = vec![0.0; self.col_row.len()];
        for j in 0..self.ncols {
            for k in self.col_start[j]..self.col_start[j + 1] {
                let i = self.col_row[k];
                self.row_col[fill[i]] = j;
                self.row_val[fill[i]] = self.col_val[k];
                fill[i] += 1;
            }
        }
        self.row_start = start;
    }

    /// Puts column `j` at a finite bound (lower first), or at zero when free.
    fn park(&mut self, j: usize) {
        let (l, u) = (self.lower[j], self.upper[j]);
        (self.x[j], self.state[j]) = if l.is_finite() {
            (l, State::Lower)
        } else if u.is_finite() {
            (u, State::Upper)
        } else {
            (0.0, State::Free)
        };
    }

    /// Appends basic artificial columns `(entries, value, basis position)` with zero
    /// phase-two cost.
    fn append_artificials(&mut self, arts: Vec<(Vec<(usize, f64)>, f64, usize)>) {
        if arts.is_empty() {
            return;
        }
        for (entries, value, r) in arts {
            for (i, v) in entries {
                self.col_row.push(i);
                self.col_val.push(v);
            }
            self.col_start.push(self.col_row.len());
            let j = self.ncols;
            self.ncols += 1;
            self.lower.push(0.0);
            self.upper.push(f64::INFINITY);
            self.phase2_cost.push(0.0);
            self.cost.push(0.0);
            self.x.push(value);
            self.state.push(State::Basic);
            self.d.push(0.0);
            self.weights.push(1.0);
            self.pi.push(0.0);
            self.pos.push(r);
            self.basis[r] = j;
        }
        self.rebuild_rows();
    }

    /// Structurals at a bound, logicals basic where that is feasible and a signed unit
    /// artificial for every other row.
    fn cold_start(&mut self) {
        let (n, m) = (self.n_struct, self.m);
        for j in 0..n {
            self.park(j);
        }
        let mut resid = self.b.clone();
        for j in 0..n {
            if self.x[j] != 0.0 {
                for k in self.col_start[j]..self.col_start[j + 1] {
                    resid[self.col_row[k]] -= self.col_val[k] * self.x[j];
                }
            }
        }
        let mut arts = Vec::new();
        for (i, &r) in resid.iter().enumerate() {
            let lj = n + i;
            let (l, u) = (self.lower[lj], self.upper[lj]);
            self.x[lj] = r.clamp(l, u);
            if r >= l - self.feas_tol && r <= u + self.feas_tol {
                self.state[lj] = State::Basic;
                self.basis[i] = lj;
                self.pos[lj] = i;
            } else {
                self.state[lj] = if self.x[lj] == l { State::Lower } else { State::Upper };
                let excess = r - self.x[lj];
                let sgn = if excess >= 0.0 { 1.0 } else { -1.0 };
                if sgn != 1.0 {
                    self.inv.push_unit(i, sgn);
                }
                arts.push((vec![(i, sgn)], excess.abs(), i));
            }
        }
        debug_assert_eq!(arts.len() + (0..m).filter(|&i| self.basis[i] != NONE).count(), m);
        self.append_artificials(arts);
    }

    /// Starts from a previous basis. Rows and columns beyond it get a basic logical and
    /// a parked structural. Basics that come out infeasible are pinned at the violated
    /// bound and replaced by an artificial copy of their column, which leaves the basis
    /// matrix unchanged up to the sign of that column.
    fn warm_start(&mut self, w: &Basis) -> Result<(), LpError> {
        let (n, m) = (self.n_struct, self.m);
        let mut basic = Vec::with_capacity(m);
        for j in 0..n + m {
            let st = if j < n { w.vars.get(j) } else { w.rows.get(j - n) };
            match st {
                Some(BasisStatus::Basic) => basic.push(j),
                None if j >= n => basic.push(j),
                Some(BasisStatus::AtLower) if self.lower[j].is_finite() => {
                    self.x[j] = self.lower[j];
                    self.state[j] = State::Lower;
                }
                Some(BasisStatus::AtUpper) if self.upper[j].is_finite() => {
                    self.x[j] = self.upper[j];
                    self.state[j] = State::Upper;
                }
                _ => self.park(j),
            }
        }
        if basic.len() > m {
            for &j in &basic[m..] {
                self.park(j);
            }
            basic.truncate(m);
        }
        let mut i = 0;
        while basic.len() < m && i < m {
            if !basic.contains(&(n + i)) {
                basic.push(n + i);
            }
            i += 1;
        }
        for (r, &j) in basic.iter().enumerate() {
            self.basis[r] = j;
            self.pos[j] = r;
            self.state[j] = State::Basic;
        }
        self.reinvert()?;
        let mut arts = Vec::new();
        for r in 0..m {
            let j = self.basis[r];
            let v = self.x[j];
            let (target, state) = if v < self.lower[j] - self.feas_tol {
                (self.lower[j], State::Lower)
            } else if v > self.upper[j] + self.feas_tol {
                (self.upper[j], State::Upper)
            } else {
                continue;
            };
            let sgn = if v > target { 1.0 } else { -1.0 };
            let entries = (self.col_start[j]..self.col_start[j + 1]).map(|k| (self.col_row[k], sgn * self.col_val[k])).collect();
            self.x[j] = target;
            self.state[j] = state;
            self.pos[j] = NONE;
            if sgn != 1.0 {
                self.inv.push_unit(r, sgn);
            }
            arts.push((entries, (v - target).abs(), r));
        }
        self.append_artificials(arts);
        Ok(())
    }

    fn export_basis(&self) -> Basis {
        let status = |j: usize| match self.state[j] {
            State::Basic => BasisStatus::Basic,
            State::Lower => BasisStatus::AtLower,
            State::Upper => BasisStatus::AtUpper,
            State::Free => BasisStatus::Free,
        };
        Basis { vars: (0..self.n_struct).map(status).collect(), rows: (self.n_struct..self.n_struct + self.m).map(status).collect() }
    }

    fn row_duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.inv.btran(&mut y);
        y
    }

    fn recompute_duals(&mut self) {
        let y = self.row_duals();
        for j in 0..self.ncols {
            if self.state[j] == State::Basic {
                self.d[j] = 0.0;
                continue;
            }
            let mut dj = self.cost[j];
            for k in self.col_start[j]..self.col_start[j + 1] {
                dj -= y[self.col_row[k]] * self.col_val[k];
            }
            self.d[j] = dj;
        }
    }

    fn recompute_primal(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if self.state[j] == State::Basic || self.x[j] == 0.0 {
                continue;
            }
            for k in self.col_start[j]..self.col_start[j + 1] {
                rhs[self.col_row[k]] -= self.col_val[k] * self.x[j];
            }
        }
        self.inv.ftran(&mut rhs);
        for (r, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[r];
        }
    }

    /// Fills `self.alpha` with `B^-1 a_j`.
    fn ftran(&mut self, j: usize) {
        self.alpha.iter_mut().for_each(|v| *v = 0.0);
        for k in self.col_start[j]..self.col_start[j + 1] {
            self.alpha[self.col_row[k]] = self.col_val[k];
        }
        self.inv.ftran(&mut self.alpha);
    }

    fn eta_update(&mut self, r: usize) {
        self.inv.push(r, &self.alpha);
    }

    /// Rebuilds the basis inverse from scratch by product-form elimination.
    fn reinvert(&mut self) -> Result<(), LpError> {
        let m = self.m;
        self.inv.clear();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![NONE; m];
        let mut done = vec![false; m];
        // Triangular part first: a row met by a single remaining column pivots on that
        // column, whose entries in earlier pivot rows are then all zero, so no fill occurs.
        let mut row_count = vec![0usize; m];
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, &j) in self.basis.iter().enumerate() {
            for k in self.col_start[j]..self.col_start[j + 1] {
                row_count[self.col_row[k]] += 1;
                row_cols[self.col_row[k]].push(c);
            }
        }
        let mut queue: Vec<usize> = (0..m).filter(|&i| row_count[i] == 1).collect();
        while let Some(i) = queue.pop() {
            if assigned[i] || row_count[i] != 1 {
                continue;
            }
            let Some(&c) = row_cols[i].iter().find(|&&c| !done[c]) else { continue };
            let j = self.basis[c];
            let piv = (self.col_start[j]..self.col_start[j + 1]).find(|&k| self.col_row[k] == i).map_or(0.0, |k| self.col_val[k]);
            if piv.abs() < 1e-3 * self.col_val[self.col_start[j]..self.col_start[j + 1]].iter().fold(0.0f64, |a, v| a.max(v.abs())) {
                continue;
            }
            self.ftran(j);
            self.eta_update(i);
            assigned[i] = true;
            new_basis[i] = j;
            done[c] = true;
            for k in self.col_start[j]..self.col_start[j + 1] {
                let r = self.col_row[k];
                row_count[r] -= 1;
                if row_count[r] == 1 && !assigned[r] {
                    queue.push(r);
                }
            }
        }
        let mut cols: Vec<usize> = (0..m).filter(|&c| !done[c]).map(|c| self.basis[c]).collect();
        cols.sort_by_key(|&j| (self.col_start[j + 1] - self.col_start[j], j));
        let mut dropped = Vec::new();
        for &j in &cols {
            self.ftran(j);
            let mut best = NONE;
            let mut best_abs = 0.0;
            for i in 0..m {
                if !assigned[i] && self.alpha[i].abs() > best_abs {
                    best_abs = self.alpha[i].abs();
                    best = i;
                }
            }
            if best == NONE || best_abs < 1e-11 {
                dropped.push(j);
                continue;
            }
            self.eta_update(best);
            assigned[best] = true;
            new_basis[best] = j;
        }
        if !dropped.is_empty() {
            // Singular basis: swap in logicals of the uncovered rows.
            for &j in &dropped {
                self.pos[j] = NONE;
                let (l, u) = (self.lower[j], self.upper[j]);
                if l.is_finite() && (!u.is_finite() || (self.x[j] - l).abs() <= (u - self.x[j]).abs()) {
                    self.x[j] = l;
                    self.state[j] = State::Lower;
                } else if u.is_finite() {
                    self.x[j] = u;
                    self.state[j] = State::Upper;
                } else {
                    self.state[j] = State::Free;
                }
            }
            for i in 0..m {
                if assigned[i] {
                    continue;
                }
                let lj = self.n_struct + i;
                if self.state[lj] == State::Basic {
                    return Err(LpError::NumericalFailure("basis repair failed".into()));
                }
                self.ftran(lj);
                let mut best = NONE;
                let mut best_abs = 0.0;
                for k in 0..m {
                    if !assigned[k] && self.alpha[k].abs() > best_abs {
                        best_abs = self.alpha[k].abs();
                        best = k;
                    }
                }
                if best == NONE || best_abs < 1e-11 {
                    return Err(LpError::NumericalFailure("basis repair failed".into()));
                }
                self.eta_update(best);
                assigned[best] = true;
                new_basis[best] = lj;
                self.state[lj] = State::Basic;
            }
        }
        self.basis = new_basis;
        for (r, &j) in self.basis.iter().enumerate() {
            self.pos[j] = r;
            self.state[j] = State::Basic;
        }
        self.since_refactor = 0;
        self.recompute_primal();
        self.recompute_duals();
        Ok(())
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let dj = self.d[j];
            let (score, dir) = match self.state[j] {
                State::Basic => continue,
                State::Lower => {
                    if dj < -self.opt_tol && self.upper[j] > self.lower[j] {
                        (-dj, 1.0)
                    } else {
                        continue;
                    }
                }
                State::Upper => {
                    if dj > self.opt_tol && self.upper[j] > self.lower[j] {
                        (dj, -1.0)
                    } else {
                        continue;
                    }
                }
                State::Free => {
                    if dj.abs() > self.opt_tol {
                        (dj.abs(), if dj < 0.0 { 1.0 } else { -1.0 })
                    } else {
                        continue;
                    }
                }
            };
            if bland {
                return Some((j, dir));
            }
            let score = score * score / self.weights[j];
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Step {
        let flip = if self.lower[q].is_finite() && self.upper[q].is_finite() {
            self.upper[q] - self.lower[q]
        } else {
            f64::INFINITY
        };
        // Pass one: largest step keeping every basic within its bounds relaxed by the tolerance.
        let mut theta_max = f64::INFINITY;
        for r in 0..self.m {
            let a = self.alpha[r];
            if a.abs() <= self.piv_tol {
                continue;
            }
            let rate = -dir * a;
            let j = self.basis[r];
            let bound_dist = if rate < 0.0 {
                if !self.lower[j].is_finite() {
                    continue;
                }
                self.x[j] - self.lower[j]
            } else {
                if !self.upper[j].is_finite() {
                    continue;
                }
                self.upper[j] - self.x[j]
            };
            let t = (bound_dist.max(0.0) + self.feas_tol) / rate.abs();
            if t < theta_max {
                theta_max = t;
            }
        }
        if theta_max == f64::INFINITY {
            return if flip.is_finite() { Step::Flip(flip) } else { Step::Unbounded };
        }
        // Pass two: among candidates within theta_max take the largest pivot (or lowest index
        // under Bland's rule, breaking exact-ratio ties).
        let mut chosen = NONE;
        let mut chosen_key = f64::NEG_INFINITY;
        let mut chosen_theta = 0.0;
        let mut chosen_up = false;
        let mut min_ratio = f64::INFINITY;
        if bland {
            for r in 0..self.m {
                if let Some((t, _)) = self.candidate(r, dir) {
                    min_ratio = min_ratio.min(t);
                }
            }
        }
        for r in 0..self.m {
            let Some((t, up)) = self.candidate(r, dir) else { continue };
            if bland {
                if t <= min_ratio + 1e-12 {
                    let key = -(self.basis[r] as f64);
                    if key > chosen_key {
                        chosen_key = key;
                        chosen = r;
                        chosen_theta = t;
                        chosen_up = up;
                    }
                }
            } else if t <= theta_max {
                let key = self.alpha[r].abs();
                if key > chosen_key {
                    chosen_key = key;
                    chosen = r;
                    chosen_theta = t;
                    chosen_up = up;
                }
            }
        }
        if chosen == NONE {
            return if flip.is_finite() { Step::Flip(flip) } else { Step::Unbounded };
        }
        if flip <= chosen_theta {
            return Step::Flip(flip);
        }
        Step::Pivot { row: chosen, theta: chosen_theta, to_upper: chosen_up }
    }

    fn candidate(&self, r: usize, dir: f64) -> Option<(f64, bool)> {
        let a = self.alpha[r];
        if a.abs() <= self.piv_tol {
            return None;
        }
        let rate = -dir * a;
        let j = self.basis[r];
        if rate < 0.0 {
            if !self.lower[j].is_finite() {
                return None;
            }
            Some(((self.x[j] - self.lower[j]).max(0.0) / -rate, false))
        } else {
            if !self.upper[j].is_finite() {
                return None;
            }
            Some(((self.upper[j] - self.x[j]).max(0.0) / rate, true))
        }
    }

    fn run(&mut self) -> Result<PhaseEnd, LpError> {
        let mut verified = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if self.since_refactor >= self.refactor_period {
                self.reinvert()?;
            }
            let bland = self.degenerate_run >= self.bland_after;
            let Some((q, dir)) = self.choose_entering(bland) else {
                if verified || self.since_refactor == 0 {
                    return Ok(PhaseEnd::Optimal);
                }
                // Confirm optimality on a fresh factorization before stopping.
                self.reinvert()?;
                verified = true;
                continue;
            };
            verified = false;
            self.ftran(q);
            match self.ratio_test(q, dir, bland) {
                Step::Unbounded => return Ok(PhaseEnd::Unbounded),
                Step::Flip(theta) => {
                    self.apply_step(q, dir, theta);
                    self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                    self.degenerate_run = 0;
                }
                Step::Pivot { row, theta, to_upper } => {
                    self.pivot(q, dir, row, theta, to_upper);
                }
            }
            self.iterations += 1;
            self.since_refactor += 1;
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        for r in 0..self.m {
            let a = self.alpha[r];
            if a != 0.0 {
                let j = self.basis[r];
                self.x[j] -= theta * dir * a;
            }
        }
        self.x[q] += dir * theta;
    }

    fn pivot(&mut self, q: usize, dir: f64, r: usize, theta: f64, to_upper: bool) {
        let m = self.m;
        if theta < 1e-12 {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        self.apply_step(q, dir, theta);
        let p = self.basis[r];
        if to_upper {
            self.x[p] = self.upper[p];
            self.state[p] = State::Upper;
        } else {
            self.x[p] = self.lower[p];
            self.state[p] = State::Lower;
        }
        if self.lower[p] == self.upper[p] {
            self.state[p] = State::Lower;
        }

        // Reduced-cost update along the pivot row.
        self.rho.iter_mut().for_each(|v| *v = 0.0);
        self.rho[r] = 1.0;
        self.inv.btran(&mut self.rho);
        let ratio = self.d[q] / self.alpha[r];
        self.touched.clear();
        for i in 0..m {
            let ri = self.rho[i];
            if ri == 0.0 {
                continue;
            }
            for k in self.row_start[i]..self.row_start[i + 1] {
                let j = self.row_col[k];
                if self.pi[j] == 0.0 {
                    self.touched.push(j);
                }
                self.pi[j] += ri * self.row_val[k];
                if self.pi[j] == 0.0 {
                    // keep the slot marked as touched
                    self.pi[j] = f64::MIN_POSITIVE;
                }
            }
        }
        let piv = self.alpha[r];
        let wq = self.weights[q];
        for &j in &self.touched {
            let pj = self.pi[j];
            self.d[j] -= ratio * pj;
            self.pi[j] = 0.0;
            if self.state[j] != State::Basic && j != q {
                let a = pj / piv;
                self.weights[j] = self.weights[j].max(a * a * wq);
            }
        }
        self.weights[p] = (wq / (piv * piv)).max(1.0);
        if self.weights[p] > DEVEX_RESET {
            self.weights.iter_mut().for_each(|w| *w = 1.0);
        }

        self.eta_update(r);
        self.basis[r] = q;
        self.pos[q] = r;
        self.pos[p] = NONE;
        self.state[q] = State::Basic;
        self.d[q] = 0.0;
    }
}
