//! Row generation on the dual of the exponential LP for generic submodular ambiguity sets.
//!
//! The dual is `min y0 + γ'y` subject to `y0 + Σ_j y_j f_j(ξ) ≥ F(ξ)` for every lattice
//! point, `y ≥ 0`. Rows are added on demand: the most violated row for each piece `g_k`
//! minimizes `y0 + Σ_j y_j f_j - g_k`, which is submodular whenever the `f_j` are
//! submodular and `g_k` is supermodular.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use sharpbound_lp::{solve_lp, LpError, LpModel, LpStatus, RowId, RowSense, Sense, Var};

use crate::comonotone::comonotone_coupling;
use crate::decision::{AffinePieces, Polyhedron};
use crate::error::{Error, Result};
use crate::lattice::{argmin_table, verify_submodular_with_cap, verify_supermodular, LatticeFunction};
use crate::types::{
    AmbiguitySpec, ConstraintKind, GenericSubmodular, JointDistribution, Oracle, PiecewiseAffineObjective, ProductSupport,
    SubmodularConstraint, DEFAULT_LATTICE_CAP,
};

/// A cut is added when its violation is below `-VIOLATION_TOL`.
pub const VIOLATION_TOL: f64 = 1e-8;
/// Default cap on generated cuts.
pub const DEFAULT_MAX_CUTS: usize = 10_000;
/// Safety box on the multipliers; reaching it means the ambiguity set is (nearly) empty.
const Y_BOX: f64 = 1e7;

/// Multipliers of the dual LP.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub y0: f64,
    pub y: Vec<f64>,
}

/// Outcome of a bound computation.
#[derive(Clone, Debug)]
pub struct BoundResult {
    pub value: f64,
    pub dual: Option<DualSolution>,
    /// Lattice points (as index vectors) whose dual rows were generated.
    pub cuts: Vec<Vec<usize>>,
    pub extremal: Option<JointDistribution>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct GenboundOptions {
    pub max_cuts: usize,
    pub lattice_cap: usize,
    /// Check every constraint oracle (and supermodular piece) on the lattice first.
    pub verify: bool,
}

impl Default for GenboundOptions {
    fn default() -> Self {
        GenboundOptions { max_cuts: DEFAULT_MAX_CUTS, lattice_cap: DEFAULT_LATTICE_CAP, verify: false }
    }
}

/// Lattice tables shared by all rounds.
struct Tables {
    points: Vec<Vec<usize>>,
    /// `f[j][p]`
    f: Vec<Vec<f64>>,
    gamma: Vec<f64>,
}

impl Tables {
    fn build(spec: &GenericSubmodular, opts: &GenboundOptions) -> Result<Tables> {
        let support = &spec.support;
        let issues = support.issues();
        if !issues.is_empty() {
            return Err(Error::InvalidSpec(issues));
        }
        support.size_within(opts.lattice_cap)?;
        let points: Vec<Vec<usize>> = support.points().collect();
        let oracles = spec.oracles();
        if opts.verify {
            for (j, o) in oracles.iter().enumerate() {
                let lf = LatticeFunction::from_oracle(support.clone(), o.clone());
                if !verify_submodular_with_cap(&lf, opts.lattice_cap)? {
                    return Err(Error::Invalid(format!("constraint {j} is not submodular")));
                }
            }
        }
        let f: Vec<Vec<f64>> = oracles
            .iter()
            .map(|o| points.iter().map(|p| o(&support.values(p))).collect::<Vec<f64>>())
            .collect();
        if let Some(j) = f.iter().position(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Invalid(format!("constraint {j} is not finite on the lattice")));
        }
        let gamma = spec.constraints.iter().map(|c| c.gamma).collect();
        Ok(Tables { points, f, gamma })
    }

    fn j(&self) -> usize {
        self.f.len()
    }

    /// `y0 + Σ_j y_j f_j(p)` for every lattice point.
    fn dual_surface(&self, y0: f64, y: &[f64]) -> Vec<f64> {
        let mut s = vec![y0; self.points.len()];
        for (fj, &yj) in self.f.iter().zip(y) {
            if yj != 0.0 {
                for (v, &f) in s.iter_mut().zip(fj) {
                    *v += yj * f;
                }
            }
        }
        s
    }
}

/// Warm-start points: lattice extremes plus the comonotone support of embedded marginals.
fn seeds(spec: &GenericSubmodular) -> Vec<usize> {
    let s = &spec.support;
    let mut out = BTreeSet::from([s.linear_index(&s.min_point()), s.linear_index(&s.max_point())]);
    if spec.marginals.len() == s.n() && spec.marginals.iter().zip(&s.dims).all(|(m, d)| &m.values == d) {
        if let Ok(c) = comonotone_coupling(&spec.marginals) {
            out.extend(c.mass.keys().map(|p| s.linear_index(p)));
        }
    }
    out.into_iter().collect()
}

struct Round {
    value: f64,
    y0: f64,
    y: Vec<f64>,
    cuts: Vec<usize>,
    duals: Vec<f64>,
    iterations: usize,
}

/// Solves the dual restricted to generated rows until no piece yields a violated row.
/// `pieces[k][p]` is `g_k` at lattice point `p`.
fn generate(t: &Tables, pieces: &[Vec<f64>], mut cuts: Vec<usize>, max_cuts: usize) -> Result<Round> {
    let rhs = |p: usize| pieces.iter().map(|g| g[p]).fold(f64::NEG_INFINITY, f64::max);
    let mut in_pool: BTreeSet<usize> = cuts.iter().copied().collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut model = LpModel::new(Sense::Minimize);
        let y0 = model.add_free(1.0);
        let y: Vec<Var> = t.gamma.iter().map(|&g| model.add_var(g, 0.0, Y_BOX)).collect();
        let rows: Vec<RowId> = cuts
            .iter()
            .map(|&p| {
                let terms = std::iter::once((y0, 1.0)).chain(y.iter().zip(&t.f).map(|(&v, f)| (v, f[p])));
                model.add_row(terms, RowSense::Ge, rhs(p))
            })
            .collect();
        let sol = solve_lp(&model)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible("restricted dual is infeasible".into())),
            LpStatus::Unbounded => return Err(Error::Infeasible("restricted dual is unbounded".into())),
        }
        let y0v = sol.value(y0);
        let yv: Vec<f64> = y.iter().map(|&v| sol.value(v).max(0.0)).collect();
        let surface = t.dual_surface(y0v, &yv);
        let mut added = false;
        for g in pieces {
            let (p, viol) = argmin_table(surface.iter().zip(g).map(|(s, g)| s - g));
            if viol < -VIOLATION_TOL && in_pool.insert(p) {
                cuts.push(p);
                added = true;
            }
        }
        if !added {
            let duals = rows.iter().map(|&r| sol.dual(r).max(0.0)).collect();
            return Ok(Round { value: sol.objective, y0: y0v, y: yv, cuts, duals, iterations });
        }
        if cuts.len() > max_cuts {
            return Err(Error::CutLimit(max_cuts));
        }
    }
}

/// Phase one: decides nonemptiness with the homogeneous dual
/// `min y0 + γ'y` s.t. `y0 + Σ_j y_j f_j(ξ) ≥ 0`, `0 ≤ y ≤ 1`.
/// The set is empty iff the value is negative. Returns the value and the final cut pool.
fn phase_one(t: &Tables, seeds: Vec<usize>, max_cuts: usize) -> Result<(f64, Vec<usize>)> {
    if t.j() == 0 {
        return Ok((0.0, seeds));
    }
    let mut pool = seeds;
    let mut in_pool: BTreeSet<usize> = pool.iter().copied().collect();
    loop {
        let mut model = LpModel::new(Sense::Minimize);
        let y0 = model.add_free(1.0);
        let y: Vec<Var> = t.gamma.iter().map(|&g| model.add_var(g, 0.0, 1.0)).collect();
        for &p in &pool {
            let terms = std::iter::once((y0, 1.0)).chain(y.iter().zip(&t.f).map(|(&v, f)| (v, f[p])));
            model.add_row(terms, RowSense::Ge, 0.0);
        }
        let sol = solve_lp(&model)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Lp(LpError::NumericalFailure("feasibility LP did not solve".into())));
        }
        let yv: Vec<f64> = y.iter().map(|&v| sol.value(v).max(0.0)).collect();
        let surface = t.dual_surface(sol.value(y0), &yv);
        let (p, viol) = argmin_table(surface.iter().copied());
        if viol < -VIOLATION_TOL && in_pool.insert(p) {
            pool.push(p);
            if pool.len() > max_cuts {
                return Err(Error::CutLimit(max_cuts));
            }
            continue;
        }
        return Ok((sol.objective, pool));
    }
}

fn bound_from_tables(spec: &GenericSubmodular, t: &Tables, pieces: &[Vec<f64>], opts: &GenboundOptions) -> Result<BoundResult> {
    let (feas, pool) = phase_one(t, seeds(spec), opts.max_cuts)?;
    if feas < -VIOLATION_TOL {
        return Err(Error::Infeasible(format!("no distribution satisfies the constraints (certificate value {feas:e})")));
    }
    let round = generate(t, pieces, pool, opts.max_cuts)?;
    if round.y.iter().any(|&v| v >= Y_BOX * (1.0 - 1e-9)) {
        return Err(Error::Infeasible("dual multipliers diverge".into()));
    }
    let support = spec.support.clone();
    let mut mass = BTreeMap::new();
    for (&p, &d) in round.cuts.iter().zip(&round.duals) {
        if d > 0.0 {
            mass.insert(t.points[p].clone(), d);
        }
    }
    Ok(BoundResult {
        value: round.value,
        dual: Some(DualSolution { y0: round.y0, y: round.y }),
        cuts: round.cuts.iter().map(|&p| t.points[p].clone()).collect(),
        extremal: Some(JointDistribution { support, mass }),
        iterations: round.iterations,
    })
}

fn objective_tables(t: &Tables, support: &ProductSupport, obj: &PiecewiseAffineObjective) -> Result<Vec<Vec<f64>>> {
    let issues = obj.issues(Some(support.n()));
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(issues));
    }
    let values: Vec<Vec<f64>> = t.points.iter().map(|p| support.values(p)).collect();
    Ok((0..obj.k()).map(|k| values.iter().map(|x| obj.piece(k, x)).collect()).collect())
}

/// `sup E[max_k a_k'ξ + b_k]` over the generic ambiguity set.
pub fn sharp_bound_generic(spec: &GenericSubmodular, obj: &PiecewiseAffineObjective) -> Result<BoundResult> {
    sharp_bound_generic_with(spec, obj, &GenboundOptions::default())
}

pub fn sharp_bound_generic_with(
    spec: &GenericSubmodular,
    obj: &PiecewiseAffineObjective,
    opts: &GenboundOptions,
) -> Result<BoundResult> {
    let t = Tables::build(spec, opts)?;
    let pieces = objective_tables(&t, &spec.support, obj)?;
    bound_from_tables(spec, &t, &pieces, opts)
}

/// `sup E[max_k g_k(ξ)]` for supermodular pieces `g_k`. Any constant offset of a piece is
/// part of `g_k` itself.
pub fn sharp_bound_supermodular_pieces(spec: &GenericSubmodular, pieces: &[LatticeFunction]) -> Result<BoundResult> {
    sharp_bound_supermodular_pieces_with(spec, pieces, &GenboundOptions::default())
}

pub fn sharp_bound_supermodular_pieces_with(
    spec: &GenericSubmodular,
    pieces: &[LatticeFunction],
    opts: &GenboundOptions,
) -> Result<BoundResult> {
    if pieces.is_empty() {
        return Err(Error::Invalid("at least one piece is required".into()));
    }
    if let Some(g) = pieces.iter().find(|g| !g.support.same_as(&spec.support)) {
        return Err(Error::Invalid(format!("piece lattice {:?} differs from the spec lattice", g.support.dims)));
    }
    let t = Tables::build(spec, opts)?;
    if opts.verify {
        for (k, g) in pieces.iter().enumerate() {
            if !verify_supermodular(g)? {
                return Err(Error::Invalid(format!("piece {k} is not supermodular")));
            }
        }
    }
    let tables: Vec<Vec<f64>> = pieces.iter().map(|g| t.points.iter().map(|p| g.at(p)).collect()).collect();
    if tables.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("piece is not finite on the lattice".into()));
    }
    bound_from_tables(spec, &t, &tables, opts)
}

/// Whether some distribution on the lattice satisfies every constraint.
pub fn feasibility_test(spec: &GenericSubmodular) -> Result<bool> {
    let opts = GenboundOptions::default();
    let t = Tables::build(spec, &opts)?;
    let (value, _) = phase_one(&t, seeds(spec), opts.max_cuts)?;
    Ok(value >= -VIOLATION_TOL)
}

/// Closed-form feasibility when the constraints pin the embedded marginals: the comonotone
/// coupling minimizes every submodular expectation over the Fréchet set, so the set is
/// nonempty iff that coupling satisfies all constraints. `None` without embedded marginals.
pub fn comonotone_feasible(spec: &GenericSubmodular) -> Option<bool> {
    if spec.marginals.len() != spec.support.n() {
        return None;
    }
    let c = comonotone_coupling(&spec.marginals).ok()?;
    let oracles = spec.oracles();
    Some(spec.constraints.iter().zip(&oracles).all(|(con, o)| c.expectation(|x| o(x)) <= con.gamma + VIOLATION_TOL))
}

/// The same ambiguity set written as submodular expectation constraints: Fréchet rows for
/// the marginals, `-1{ξ_I ≥ t}` for tail targets and `∓h_l`, `-ξ_i ξ_j` for moments.
pub fn as_generic(spec: &AmbiguitySpec) -> GenericSubmodular {
    match spec {
        AmbiguitySpec::GenericSubmodular(g) => g.clone(),
        AmbiguitySpec::PodBivariate(s) => {
            let mut g = GenericSubmodular::frechet(&s.marginals);
            for (pt, target) in s.resolved_targets() {
                let kind = ConstraintKind::NegUpperOrthant {
                    i: pt.i,
                    j: pt.j,
                    ti: s.marginals[pt.i].values[pt.u],
                    tj: s.marginals[pt.j].values[pt.w],
                };
                g.constraints.push(SubmodularConstraint::new(kind, -target));
            }
            g
        }
        AmbiguitySpec::BooleanHigherOrder(s) => {
            let mut g = GenericSubmodular::frechet(&s.marginals());
            for (set, target) in s.resolved_targets() {
                let oracle: Oracle = Arc::new(move |x: &[f64]| if set.iter().all(|&i| x[i] > 0.5) { -1.0 } else { 0.0 });
                g.constraints.push(SubmodularConstraint::new(ConstraintKind::Custom(oracle), -target));
            }
            g
        }
        AmbiguitySpec::Moment(s) => {
            let mut constraints = Vec::new();
            for i in 0..s.support.n() {
                for l in 1..=s.num_moments(i) {
                    let table: Vec<f64> = (0..s.support.dim_len(i)).map(|v| s.h(i, l, v)).collect();
                    let values = s.support.dims[i].clone();
                    for sign in [1.0, -1.0] {
                        let (table, values) = (table.clone(), values.clone());
                        let oracle: Oracle = Arc::new(move |x: &[f64]| {
                            values.iter().position(|&v| (v - x[i]).abs() <= 1e-12).map_or(f64::NAN, |v| sign * table[v])
                        });
                        constraints.push(SubmodularConstraint::new(ConstraintKind::Custom(oracle), sign * s.moments[i][l - 1]));
                    }
                }
            }
            for (&(i, j), &q) in &s.cross {
                constraints.push(SubmodularConstraint::new(ConstraintKind::NegProduct { i, j }, -q));
            }
            GenericSubmodular::new(s.support.clone(), constraints)
        }
    }
}

/// Outcome of the robust decision problem.
#[derive(Clone, Debug)]
pub struct DroResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub dual: DualSolution,
    /// Generated `(lattice point, piece)` rows.
    pub cuts: Vec<(Vec<usize>, usize)>,
    pub iterations: usize,
}

/// `min_{x∈X} sup_P E[max_k a_k(x)'ξ + b_k(x)]` as one LP in `(x, y0, y)` with rows generated
/// per lattice point and piece.
pub fn dro_solve(spec: &GenericSubmodular, x_set: &Polyhedron, pieces: &AffinePieces) -> Result<DroResult> {
    dro_solve_with(spec, x_set, pieces, &GenboundOptions::default())
}

pub fn dro_solve_with(
    spec: &GenericSubmodular,
    x_set: &Polyhedron,
    pieces: &AffinePieces,
    opts: &GenboundOptions,
) -> Result<DroResult> {
    x_set.check()?;
    pieces.check()?;
    if pieces.dim() != x_set.dim() {
        return Err(Error::DimensionMismatch { expected: x_set.dim(), got: pieces.dim() });
    }
    if pieces.n() != spec.support.n() {
        return Err(Error::DimensionMismatch { expected: spec.support.n(), got: pieces.n() });
    }
    let t = Tables::build(spec, opts)?;
    let (feas, pool) = phase_one(&t, seeds(spec), opts.max_cuts)?;
    if feas < -VIOLATION_TOL {
        return Err(Error::Infeasible(format!("no distribution satisfies the constraints (certificate value {feas:e})")));
    }
    let values: Vec<Vec<f64>> = t.points.iter().map(|p| spec.support.values(p)).collect();
    let (k_count, d) = (pieces.k(), pieces.dim());
    let mut cuts: Vec<(usize, usize)> = pool.iter().flat_map(|&p| (0..k_count).map(move |k| (p, k))).collect();
    let mut in_pool: BTreeSet<(usize, usize)> = cuts.iter().copied().collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut model = LpModel::new(Sense::Minimize);
        let xv = x_set.add_to(&mut model);
        let y0 = model.add_free(1.0);
        let y: Vec<Var> = t.gamma.iter().map(|&g| model.add_var(g, 0.0, Y_BOX)).collect();
        for &(p, k) in &cuts {
            let xi = &values[p];
            // y0 + Σ y_j f_j(ξ) - Σ_m (Σ_i ax[k][i][m] ξ_i + bx[k][m]) x_m ≥ a0_k'ξ + b0_k
            let mut terms: Vec<(Var, f64)> = vec![(y0, 1.0)];
            terms.extend(y.iter().zip(&t.f).map(|(&v, f)| (v, f[p])));
            for m in 0..d {
                let c: f64 = (0..xi.len()).map(|i| pieces.ax[k][i][m] * xi[i]).sum::<f64>() + pieces.bx[k][m];
                terms.push((xv[m], -c));
            }
            let rhs = pieces.a0[k].iter().zip(xi).map(|(a, v)| a * v).sum::<f64>() + pieces.b0[k];
            model.add_row(terms, RowSense::Ge, rhs);
        }
        let sol = solve_lp(&model)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible("decision set is empty".into())),
            LpStatus::Unbounded => return Err(Error::Unbounded("robust problem is unbounded".into())),
        }
        let x: Vec<f64> = xv.iter().map(|&v| sol.value(v)).collect();
        let y0v = sol.value(y0);
        let yv: Vec<f64> = y.iter().map(|&v| sol.value(v).max(0.0)).collect();
        let surface = t.dual_surface(y0v, &yv);
        let obj = pieces.at(&x);
        let mut added = false;
        for k in 0..k_count {
            let (p, viol) = argmin_table(surface.iter().zip(&values).map(|(s, xi)| s - obj.piece(k, xi)));
            if viol < -VIOLATION_TOL && in_pool.insert((p, k)) {
                cuts.push((p, k));
                added = true;
            }
        }
        if !added {
            if yv.iter().any(|&v| v >= Y_BOX * (1.0 - 1e-9)) {
                return Err(Error::Infeasible("dual multipliers diverge".into()));
            }
            return Ok(DroResult {
                x,
                value: sol.objective,
                dual: DualSolution { y0: y0v, y: yv },
                cuts: cuts.iter().map(|&(p, k)| (t.points[p].clone(), k)).collect(),
                iterations,
            });
        }
        if cuts.len() > opts.max_cuts {
            return Err(Error::CutLimit(opts.max_cuts));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::{solve_boolean_higher_order, solve_moment, solve_pod_bivariate};
    use crate::types::{BooleanHigherOrder, DiscreteMarginal, MomentBasis, MomentSpec, PodBivariate};

    fn bern(p: f64) -> DiscreteMarginal {
        DiscreteMarginal::bernoulli(p).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn frechet_max_of_two_fair_coins() {
        let spec = GenericSubmodular::frechet(&[bern(0.5), bern(0.5)]);
        let r = sharp_bound_generic(&spec, &PiecewiseAffineObjective::coordinate_max(2)).unwrap();
        assert!(close(r.value, 1.0, 1e-9), "{}", r.value);
        let ext = r.extremal.unwrap();
        assert!(close(ext.expectation(|x| x[0].max(x[1])), 1.0, 1e-9));
    }

    #[test]
    fn unconstrained_is_robust_limit() {
        let s = ProductSupport::new(vec![vec![-1.0, 0.5, 2.0], vec![0.0, 3.0]]).unwrap();
        let spec = GenericSubmodular::new(s, Vec::new());
        let obj = PiecewiseAffineObjective::new(vec![vec![1.0, -1.0], vec![-2.0, 0.5]], vec![0.0, 0.25]).unwrap();
        let r = sharp_bound_generic(&spec, &obj).unwrap();
        // best points: (2, 0) gives 2, (-1, 3) gives 2 + 1.5 + 0.25 = 3.75
        assert!(close(r.value, 3.75, 1e-9));
    }

    #[test]
    fn cross_moment_constraint_gives_hunter_worsley_value() {
        let spec = GenericSubmodular::frechet(&[bern(0.5), bern(0.5)])
            .with_constraint(SubmodularConstraint::new(ConstraintKind::NegProduct { i: 0, j: 1 }, -0.25));
        let r = sharp_bound_generic(&spec, &PiecewiseAffineObjective::coordinate_max(2)).unwrap();
        assert!(close(r.value, 0.75, 1e-9), "{}", r.value);
    }

    #[test]
    fn supermodular_piece_examples() {
        let spec = GenericSubmodular::frechet(&[bern(0.5), bern(0.5)]);
        let s = spec.support.clone();
        let prod = LatticeFunction::new(s.clone(), |x| x[0] * x[1]);
        let r = sharp_bound_supermodular_pieces(&spec, &[prod.clone()]).unwrap();
        assert!(close(r.value, 0.5, 1e-9));
        let r = sharp_bound_supermodular_pieces(&spec, &[prod, LatticeFunction::new(s.clone(), |_| 0.4)]).unwrap();
        assert!(close(r.value, 0.7, 1e-9), "{}", r.value);

        let obj = PiecewiseAffineObjective::new(vec![vec![1.0, -0.5], vec![0.2, 0.7]], vec![0.1, -0.3]).unwrap();
        let pieces: Vec<LatticeFunction> = (0..obj.k())
            .map(|k| {
                let o = obj.clone();
                LatticeFunction::new(s.clone(), move |x| o.piece(k, x))
            })
            .collect();
        let a = sharp_bound_supermodular_pieces(&spec, &pieces).unwrap().value;
        let b = sharp_bound_generic(&spec, &obj).unwrap().value;
        assert!(close(a, b, 1e-9));
    }

    #[test]
    fn feasibility_examples() {
        let spec = GenericSubmodular::frechet(&[bern(0.3), bern(0.8)]);
        assert!(feasibility_test(&spec).unwrap());
        assert_eq!(comonotone_feasible(&spec), Some(true));

        let s = ProductSupport::boolean(2);
        let mean = GenericSubmodular::new(
            s,
            vec![SubmodularConstraint::new(ConstraintKind::Affine { coeffs: vec![-1.0, 0.0], constant: 0.0 }, -2.0)],
        );
        assert!(!feasibility_test(&mean).unwrap());
        assert!(matches!(
            sharp_bound_generic(&mean, &PiecewiseAffineObjective::coordinate_max(2)),
            Err(Error::Infeasible(_))
        ));

        let tight = GenericSubmodular::frechet(&[bern(0.5), bern(0.5)])
            .with_constraint(SubmodularConstraint::new(ConstraintKind::NegProduct { i: 0, j: 1 }, -0.6));
        assert!(!feasibility_test(&tight).unwrap());
        assert_eq!(comonotone_feasible(&tight), Some(false));
    }

    #[test]
    fn verification_flag_rejects_non_submodular_constraints() {
        let s = ProductSupport::boolean(2);
        let spec = GenericSubmodular::new(
            s,
            vec![SubmodularConstraint::new(ConstraintKind::Custom(std::sync::Arc::new(|x: &[f64]| x[0] * x[1])), 1.0)],
        );
        let opts = GenboundOptions { verify: true, ..Default::default() };
        assert!(sharp_bound_generic_with(&spec, &PiecewiseAffineObjective::coordinate_max(2), &opts).is_err());
    }

    fn linear_mix() -> AffinePieces {
        // x ξ1 + (1 - x) ξ2
        AffinePieces::new(vec![vec![0.0, 1.0]], vec![vec![vec![1.0], vec![-1.0]]], vec![0.0], vec![vec![0.0]]).unwrap()
    }

    #[test]
    fn dro_single_piece_puts_weight_on_smaller_mean() {
        let spec = GenericSubmodular::frechet(&[bern(0.5), bern(0.1)]);
        let r = dro_solve(&spec, &Polyhedron::unit_box(1), &linear_mix()).unwrap();
        assert!(close(r.value, 0.1, 1e-8), "{}", r.value);
        assert!(close(r.x[0], 0.0, 1e-8));
    }

    #[test]
    fn dro_singleton_matches_fixed_bound() {
        let spec = GenericSubmodular::frechet(&[bern(0.5), bern(0.1)]);
        // max(x ξ1, (1 - x) ξ2)
        let pieces = AffinePieces::new(
            vec![vec![0.0, 0.0], vec![0.0, 1.0]],
            vec![vec![vec![1.0], vec![0.0]], vec![vec![0.0], vec![-1.0]]],
            vec![0.0, 0.0],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        for x in [0.0, 0.3, 0.75] {
            let r = dro_solve(&spec, &Polyhedron::singleton(&[x]), &pieces).unwrap();
            let b = sharp_bound_generic(&spec, &pieces.at(&[x])).unwrap().value;
            assert!(close(r.value, b, 1e-8), "x={x}: {} vs {b}", r.value);
        }
    }

    #[test]
    fn dro_rejects_empty_decision_set() {
        let spec = GenericSubmodular::frechet(&[bern(0.5), bern(0.1)]);
        let x = Polyhedron::unit_box(1).with_row(vec![1.0], RowSense::Ge, 2.0);
        assert!(matches!(dro_solve(&spec, &x, &linear_mix()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn generic_encoding_matches_compact_models() {
        let obj = PiecewiseAffineObjective::new(vec![vec![1.0, 0.5, -0.2], vec![-0.4, 1.0, 0.8], vec![0.1, 0.1, 0.1]], vec![0.0, -0.1, 0.2])
            .unwrap();
        let marginals = vec![
            DiscreteMarginal::new(vec![0.0, 1.0, 2.0], vec![0.3, 0.3, 0.4]).unwrap(),
            bern(0.4),
            DiscreteMarginal::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap(),
        ];
        let pod = PodBivariate::pod(marginals);
        let compact = solve_pod_bivariate(&pod, &obj).unwrap().0.value;
        let generic = sharp_bound_generic(&as_generic(&AmbiguitySpec::PodBivariate(pod)), &obj).unwrap().value;
        assert!((compact - generic).abs() < 1e-7, "{compact} vs {generic}");

        let boolean = BooleanHigherOrder::new(vec![0.3, 0.5, 0.2], 3);
        let compact = solve_boolean_higher_order(&boolean, &obj).unwrap().0.value;
        let generic = sharp_bound_generic(&as_generic(&AmbiguitySpec::BooleanHigherOrder(boolean)), &obj).unwrap().value;
        assert!((compact - generic).abs() < 1e-7, "{compact} vs {generic}");

        let moment = MomentSpec {
            support: ProductSupport::new(vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0], vec![-1.0, 1.0]]).unwrap(),
            moments: vec![vec![1.1, 1.9], vec![0.4], vec![0.0]],
            basis: MomentBasis::Powers,
            cross: BTreeMap::from([((0, 1), 0.5), ((1, 2), 0.1)]),
        };
        let compact = solve_moment(&moment, &obj).unwrap().0.value;
        let generic = sharp_bound_generic(&as_generic(&AmbiguitySpec::Moment(moment)), &obj).unwrap().value;
        assert!((compact - generic).abs() < 1e-7, "{compact} vs {generic}");
    }
}
