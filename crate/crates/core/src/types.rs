//! Domain types shared by every solver.
//!
//! Lattice points are addressed by index vectors: entry `i` is a position in the sorted
//! value list `dims[i]`. Functions on the lattice take the corresponding real values.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of lattice points any enumeration may touch.
pub const DEFAULT_LATTICE_CAP: usize = 1_000_000;

/// Tolerance for probabilities summing to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A real-valued function on lattice values.
pub type Oracle = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Product of finite, sorted value sets `Ξ_1 × … × Ξ_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductSupport {
    pub dims: Vec<Vec<f64>>,
}

impl ProductSupport {
    pub fn new(dims: Vec<Vec<f64>>) -> Result<Self> {
        let s = ProductSupport { dims };
        let issues = s.issues();
        if issues.is_empty() {
            Ok(s)
        } else {
            Err(Error::InvalidSpec(issues))
        }
    }

    /// `{0, 1}^n`.
    pub fn boolean(n: usize) -> Self {
        ProductSupport { dims: vec![vec![0.0, 1.0]; n] }
    }

    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dims.is_empty() {
            out.push("support has no dimensions".to_string());
        }
        for (i, d) in self.dims.iter().enumerate() {
            if d.is_empty() {
                out.push(format!("support dimension {i} is empty"));
            }
            if d.iter().any(|v| !v.is_finite()) {
                out.push(format!("support dimension {i} has non-finite values"));
            }
            if d.windows(2).any(|w| w[0] >= w[1]) {
                out.push(format!("support dimension {i} is not strictly increasing"));
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_len(&self, i: usize) -> usize {
        self.dims[i].len()
    }

    /// Number of lattice points, or `None` on overflow.
    pub fn size(&self) -> Option<usize> {
        self.dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(d.len()))
    }

    /// Number of lattice points, rejecting lattices above `cap`.
    pub fn size_within(&self, cap: usize) -> Result<usize> {
        match self.size() {
            Some(s) if s <= cap => Ok(s),
            Some(s) => Err(Error::LatticeTooLarge { size: s.to_string(), cap }),
            None => Err(Error::LatticeTooLarge { size: "more than usize::MAX".into(), cap }),
        }
    }

    /// Mixed-radix enumeration, last dimension fastest (lexicographic order).
    pub fn points(&self) -> LatticePoints<'_> {
        LatticePoints { support: self, next: Some(vec![0; self.n()]) }
    }

    pub fn values(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(i, &k)| self.dims[i][k]).collect()
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().enumerate().fold(0, |acc, (i, &k)| acc * self.dims[i].len() + k)
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.len() == self.n() && idx.iter().enumerate().all(|(i, &k)| k < self.dims[i].len())
    }

    /// Index of `value` in dimension `i`, matched within 1e-12.
    pub fn index_of(&self, i: usize, value: f64) -> Option<usize> {
        self.dims.get(i)?.iter().position(|&v| (v - value).abs() <= 1e-12)
    }

    /// Converts a point given by values to indices.
    pub fn indices_of(&self, values: &[f64]) -> Option<Vec<usize>> {
        if values.len() != self.n() {
            return None;
        }
        values.iter().enumerate().map(|(i, &v)| self.index_of(i, v)).collect()
    }

    pub fn min_point(&self) -> Vec<usize> {
        vec![0; self.n()]
    }

    pub fn max_point(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.len() - 1).collect()
    }

    /// True if both supports have the same values within 1e-12.
    pub fn same_as(&self, other: &ProductSupport) -> bool {
        self.n() == other.n()
            && self.dims.iter().zip(&other.dims).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
            })
    }
}

pub struct LatticePoints<'a> {
    support: &'a ProductSupport,
    next: Option<Vec<usize>>,
}

impl Iterator for LatticePoints<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        if self.support.dims.iter().any(|d| d.is_empty()) {
            return None;
        }
        let mut nxt = cur.clone();
        let mut i = nxt.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            nxt[i] += 1;
            if nxt[i] < self.support.dims[i].len() {
                self.next = Some(nxt);
                break;
            }
            nxt[i] = 0;
        }
        Some(cur)
    }
}

/// Distribution of one coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMarginal {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl DiscreteMarginal {
    /// Validates and drops zero-probability atoms.
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let m = DiscreteMarginal { values, probs };
        let issues = m.issues_allowing_zeros();
        if !issues.is_empty() {
            return Err(Error::InvalidSpec(issues));
        }
        let (values, probs) = m.values.iter().zip(&m.probs).filter(|(_, &p)| p > 0.0).map(|(&v, &p)| (v, p)).unzip();
        Ok(DiscreteMarginal { values, probs })
    }

    /// Bernoulli on `{0, 1}` with `P(1) = p`, keeping both atoms.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Invalid(format!("Bernoulli parameter {p} outside (0, 1)")));
        }
        Ok(DiscreteMarginal { values: vec![0.0, 1.0], probs: vec![1.0 - p, p] })
    }

    fn issues_allowing_zeros(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.values.len() != self.probs.len() {
            out.push(format!("marginal has {} values but {} probabilities", self.values.len(), self.probs.len()));
            return out;
        }
        if self.values.is_empty() {
            out.push("marginal is empty".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            out.push("marginal has non-finite values".into());
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            out.push("marginal values are not strictly increasing".into());
        }
        if self.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            out.push("marginal has negative or non-finite probabilities".into());
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            out.push(format!("marginal normalization: probabilities sum to {total}"));
        }
        out
    }

    /// Structural problems, including zero-probability atoms.
    pub fn issues(&self) -> Vec<String> {
        let mut out = self.issues_allowing_zeros();
        if self.probs.iter().any(|&p| p == 0.0) {
            out.push("marginal has zero-probability atoms".into());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    pub fn expect(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().zip(&self.probs).map(|(&v, &p)| h(v) * p).sum()
    }

    /// `P(ξ ≥ values[idx])`.
    pub fn upper_tail(&self, idx: usize) -> f64 {
        self.probs[idx..].iter().sum()
    }

    /// `P(ξ ≤ values[idx])`.
    pub fn lower_tail(&self, idx: usize) -> f64 {
        self.probs[..=idx].iter().sum()
    }
}

/// `f(ξ) = max_k (a_k'ξ + b_k)`; row `k` of `a` is the coefficient vector `a_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffineObjective {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl PiecewiseAffineObjective {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let o = PiecewiseAffineObjective { a, b };
        let issues = o.issues(None);
        if issues.is_empty() {
            Ok(o)
        } else {
            Err(Error::InvalidSpec(issues))
        }
    }

    /// The coordinate maximum `max_i ξ_i`.
    pub fn coordinate_max(n: usize) -> Self {
        let a = (0..n).map(|k| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()).collect();
        PiecewiseAffineObjective { a, b: vec![0.0; n] }
    }

    pub fn issues(&self, n: Option<usize>) -> Vec<String> {
        let mut out = Vec::new();
        if self.a.is_empty() {
            out.push("objective has no pieces".into());
        }
        if self.a.len() != self.b.len() {
            out.push(format!("objective has {} coefficient rows but {} offsets", self.a.len(), self.b.len()));
        }
        let width = n.or_else(|| self.a.first().map(|r| r.len()));
        if let Some(w) = width {
            if self.a.iter().any(|r| r.len() != w) {
                out.push(format!("objective coefficient rows must all have length {w}"));
            }
        }
        if self.a.iter().flatten().chain(&self.b).any(|v| !v.is_finite()) {
            out.push("objective has non-finite coefficients".into());
        }
        out
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    pub fn piece(&self, k: usize, xi: &[f64]) -> f64 {
        self.a[k].iter().zip(xi).map(|(a, x)| a * x).sum::<f64>() + self.b[k]
    }

    /// Value and smallest maximizing piece (0-based).
    pub fn eval(&self, xi: &[f64]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for k in 0..self.k() {
            let v = self.piece(k, xi);
            if v > best.0 {
                best = (v, k);
            }
        }
        best
    }

    pub fn value(&self, xi: &[f64]) -> f64 {
        self.eval(xi).0
    }
}

/// Evaluates `max_k (a_k'ξ + b_k)` and returns the smallest maximizing piece, 1-based.
pub fn evaluate_objective(obj: &PiecewiseAffineObjective, xi: &[f64]) -> Result<(f64, usize)> {
    if xi.len() != obj.n() {
        return Err(Error::DimensionMismatch { expected: obj.n(), got: xi.len() });
    }
    let (v, k) = obj.eval(xi);
    Ok((v, k + 1))
}

/// Structured submodular test functions. All are submodular on any product lattice.
#[derive(Clone)]
pub enum ConstraintKind {
    /// `sign · 1{ξ_dim = value}`; univariate, hence modular.
    Indicator { dim: usize, value: f64, sign: f64 },
    /// `c'ξ + constant`.
    Affine { coeffs: Vec<f64>, constant: f64 },
    /// `-ξ_i ξ_j`.
    NegProduct { i: usize, j: usize },
    /// `-1{ξ_i ≥ t_i, ξ_j ≥ t_j}`.
    NegUpperOrthant { i: usize, j: usize, ti: f64, tj: f64 },
    /// Values over the lattice in enumeration order; submodularity is the caller's claim.
    Table(Vec<f64>),
    /// Arbitrary oracle; submodularity is the caller's claim.
    Custom(Oracle),
}

impl fmt::Debug for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintKind::Indicator { dim, value, sign } => write!(f, "{sign}·1{{ξ{dim}={value}}}"),
            ConstraintKind::Affine { coeffs, constant } => write!(f, "affine({coeffs:?}, {constant})"),
            ConstraintKind::NegProduct { i, j } => write!(f, "-ξ{i}·ξ{j}"),
            ConstraintKind::NegUpperOrthant { i, j, ti, tj } => write!(f, "-1{{ξ{i}≥{ti}, ξ{j}≥{tj}}}"),
            ConstraintKind::Table(t) => write!(f, "table[{}]", t.len()),
            ConstraintKind::Custom(_) => write!(f, "custom oracle"),
        }
    }
}

impl ConstraintKind {
    /// Evaluation oracle on `support`.
    pub fn oracle(&self, support: &ProductSupport) -> Oracle {
        match self.clone() {
            ConstraintKind::Indicator { dim, value, sign } => {
                Arc::new(move |x: &[f64]| if (x[dim] - value).abs() <= 1e-12 { sign } else { 0.0 })
            }
            ConstraintKind::Affine { coeffs, constant } => {
                Arc::new(move |x: &[f64]| coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + constant)
            }
            ConstraintKind::NegProduct { i, j } => Arc::new(move |x: &[f64]| -x[i] * x[j]),
            ConstraintKind::NegUpperOrthant { i, j, ti, tj } => {
                Arc::new(move |x: &[f64]| if x[i] >= ti - 1e-12 && x[j] >= tj - 1e-12 { -1.0 } else { 0.0 })
            }
            ConstraintKind::Table(values) => {
                let support = support.clone();
                Arc::new(move |x: &[f64]| match support.indices_of(x) {
                    Some(idx) => values[support.linear_index(&idx)],
                    None => f64::NAN,
                })
            }
            ConstraintKind::Custom(f) => f,
        }
    }
}

/// `E[f(ξ)] ≤ γ`.
#[derive(Clone, Debug)]
pub struct SubmodularConstraint {
    pub kind: ConstraintKind,
    pub gamma: f64,
}

impl SubmodularConstraint {
    pub fn new(kind: ConstraintKind, gamma: f64) -> Self {
        SubmodularConstraint { kind, gamma }
    }
}

/// Ambiguity set `{P : E_P[f_j] ≤ γ_j}` over a product lattice.
#[derive(Clone, Debug)]
pub struct GenericSubmodular {
    pub support: ProductSupport,
    pub constraints: Vec<SubmodularConstraint>,
    /// Marginals known to be pinned by the constraints (used for seeding and the
    /// comonotone feasibility cross-check). Empty when none are embedded.
    pub marginals: Vec<DiscreteMarginal>,
}

impl GenericSubmodular {
    pub fn new(support: ProductSupport, constraints: Vec<SubmodularConstraint>) -> Self {
        GenericSubmodular { support, constraints, marginals: Vec::new() }
    }

    /// Fréchet set encoded with `±1{ξ_i = v}` constraints.
    pub fn frechet(marginals: &[DiscreteMarginal]) -> Self {
        let support = ProductSupport { dims: marginals.iter().map(|m| m.values.clone()).collect() };
        let mut constraints = Vec::new();
        for (i, m) in marginals.iter().enumerate() {
            for (&v, &p) in m.values.iter().zip(&m.probs) {
                constraints.push(SubmodularConstraint::new(ConstraintKind::Indicator { dim: i, value: v, sign: 1.0 }, p));
                constraints.push(SubmodularConstraint::new(ConstraintKind::Indicator { dim: i, value: v, sign: -1.0 }, -p));
            }
        }
        GenericSubmodular { support, constraints, marginals: marginals.to_vec() }
    }

    pub fn with_constraint(mut self, c: SubmodularConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn oracles(&self) -> Vec<Oracle> {
        self.constraints.iter().map(|c| c.kind.oracle(&self.support)).collect()
    }
}

/// One pair-tail target `P(ξ_i ≥ Ξ_i[u], ξ_j ≥ Ξ_j[w])`, with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairPoint {
    pub i: usize,
    pub j: usize,
    pub u: usize,
    pub w: usize,
}

/// Fixed marginals with lower bounds on bivariate upper-tail probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct PodBivariate {
    pub marginals: Vec<DiscreteMarginal>,
    /// `None` means the full grid with product-of-tails targets (POD). `Some(map)`
    /// restricts the tail constraints to the listed points with the given targets.
    pub targets: Option<BTreeMap<PairPoint, f64>>,
}

impl PodBivariate {
    pub fn pod(marginals: Vec<DiscreteMarginal>) -> Self {
        PodBivariate { marginals, targets: None }
    }

    pub fn support(&self) -> ProductSupport {
        ProductSupport { dims: self.marginals.iter().map(|m| m.values.clone()).collect() }
    }

    /// Explicit list of targets, expanding the default.
    pub fn resolved_targets(&self) -> Vec<(PairPoint, f64)> {
        match &self.targets {
            Some(map) => map.iter().map(|(&k, &v)| (k, v)).collect(),
            None => {
                let n = self.marginals.len();
                let mut out = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        for u in 0..self.marginals[i].len() {
                            for w in 0..self.marginals[j].len() {
                                let t = self.marginals[i].upper_tail(u) * self.marginals[j].upper_tail(w);
                                out.push((PairPoint { i, j, u, w }, t));
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

/// Boolean marginals `P(ξ_i = 1) = p_i` with lower bounds on `E[∏_{i∈I} ξ_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BooleanHigherOrder {
    pub p: Vec<f64>,
    pub m: usize,
    /// Targets keyed by sorted index sets; missing sets with `1 < |I| ≤ m` default to `∏ p_i`.
    pub q: BTreeMap<Vec<usize>, f64>,
}

impl BooleanHigherOrder {
    pub fn new(p: Vec<f64>, m: usize) -> Self {
        BooleanHigherOrder { p, m, q: BTreeMap::new() }
    }

    pub fn marginals(&self) -> Vec<DiscreteMarginal> {
        self.p.iter().map(|&p| DiscreteMarginal { values: vec![0.0, 1.0], probs: vec![1.0 - p, p] }).collect()
    }

    /// Target for subset `set` (sorted).
    pub fn target(&self, set: &[usize]) -> f64 {
        self.q.get(set).copied().unwrap_or_else(|| set.iter().map(|&i| self.p[i]).product())
    }

    /// All sets `1 < |I| ≤ m` (ordered as in [`subsets_up_to`]) with their targets.
    pub fn resolved_targets(&self) -> Vec<(Vec<usize>, f64)> {
        subsets_up_to(self.p.len(), self.m)
            .into_iter()
            .map(|s| {
                let t = self.target(&s);
                (s, t)
            })
            .collect()
    }
}

/// Subsets of `0..n` with `2 ≤ |I| ≤ m`, ordered by size and then lexicographically.
pub fn subsets_up_to(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 2..=m.min(n) {
        rec(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Univariate test functions whose expectations are pinned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentBasis {
    /// `h_l(ξ) = ξ^l` for `l = 1..L`.
    Powers,
    /// `tables[i][l][v]` is `h_l` evaluated at the `v`-th support value of dimension `i`.
    Tables(Vec<Vec<Vec<f64>>>),
}

/// Univariate moments `E[h_l(ξ_i)] = m_{i,l}` plus cross-moment lower bounds `E[ξ_i ξ_j] ≥ Q_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec {
    pub support: ProductSupport,
    /// `moments[i][l-1] = m_{i,l}`.
    pub moments: Vec<Vec<f64>>,
    pub basis: MomentBasis,
    /// Lower bounds keyed by `(i, j)` with `i < j`; absent pairs are unconstrained.
    pub cross: BTreeMap<(usize, usize), f64>,
}

impl MomentSpec {
    /// Value of `h_l` (1-based `l`) at support index `v` of dimension `i`.
    pub fn h(&self, i: usize, l: usize, v: usize) -> f64 {
        match &self.basis {
            MomentBasis::Powers => self.support.dims[i][v].powi(l as i32),
            MomentBasis::Tables(t) => t[i][l - 1][v],
        }
    }

    pub fn num_moments(&self, i: usize) -> usize {
        self.moments[i].len()
    }

    /// Moments and cross moments of `joint`, in the layout of this spec.
    pub fn from_distribution(joint: &JointDistribution, l: usize, cross_pairs: &[(usize, usize)]) -> MomentSpec {
        let n = joint.support.n();
        let mut moments = vec![vec![0.0; l]; n];
        let mut cross: BTreeMap<(usize, usize), f64> = cross_pairs.iter().map(|&p| (p, 0.0)).collect();
        for (pt, &pr) in &joint.mass {
            let x = joint.support.values(pt);
            for i in 0..n {
                for ll in 1..=l {
                    moments[i][ll - 1] += pr * x[i].powi(ll as i32);
                }
            }
            for (&(i, j), v) in cross.iter_mut() {
                *v += pr * x[i] * x[j];
            }
        }
        MomentSpec { support: joint.support.clone(), moments, basis: MomentBasis::Powers, cross }
    }
}

/// One of the four ambiguity-set families.
#[derive(Clone, Debug)]
pub enum AmbiguitySpec {
    GenericSubmodular(GenericSubmodular),
    PodBivariate(PodBivariate),
    BooleanHigherOrder(BooleanHigherOrder),
    Moment(MomentSpec),
}

impl AmbiguitySpec {
    pub fn support(&self) -> ProductSupport {
        match self {
            AmbiguitySpec::GenericSubmodular(g) => g.support.clone(),
            AmbiguitySpec::PodBivariate(p) => p.support(),
            AmbiguitySpec::BooleanHigherOrder(b) => ProductSupport::boolean(b.p.len()),
            AmbiguitySpec::Moment(m) => m.support.clone(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AmbiguitySpec::GenericSubmodular(g) => g.support.n(),
            AmbiguitySpec::PodBivariate(p) => p.marginals.len(),
            AmbiguitySpec::BooleanHigherOrder(b) => b.p.len(),
            AmbiguitySpec::Moment(m) => m.support.n(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            AmbiguitySpec::GenericSubmodular(_) => "generic_submodular",
            AmbiguitySpec::PodBivariate(_) => "pod_bivariate",
            AmbiguitySpec::BooleanHigherOrder(_) => "boolean_higher_order",
            AmbiguitySpec::Moment(_) => "moment",
        }
    }
}

/// Outcome of [`validate_spec`]: empty means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(self.issues))
        }
    }
}

/// Structural checks only; whether the set is nonempty is decided by the solvers.
pub fn validate_spec(spec: &AmbiguitySpec) -> ValidationReport {
    let mut issues = Vec::new();
    match spec {
        AmbiguitySpec::GenericSubmodular(g) => {
            issues.extend(g.support.issues());
            for (j, c) in g.constraints.iter().enumerate() {
                if !c.gamma.is_finite() {
                    issues.push(format!("constraint {j} has non-finite bound"));
                }
                if let ConstraintKind::Table(t) = &c.kind {
                    if Some(t.len()) != g.support.size() {
                        issues.push(format!("constraint {j} table does not cover the lattice"));
                    }
                }
            }
        }
        AmbiguitySpec::PodBivariate(p) => {
            if p.marginals.is_empty() {
                issues.push("no marginals".into());
            }
            for (i, m) in p.marginals.iter().enumerate() {
                issues.extend(m.issues().into_iter().map(|s| format!("marginal {i}: {s}")));
            }
            if issues.is_empty() {
                if let Some(map) = &p.targets {
                    for (pt, &t) in map {
                        let n = p.marginals.len();
                        if pt.i >= pt.j || pt.j >= n || pt.u >= p.marginals[pt.i].len() || pt.w >= p.marginals[pt.j].len() {
                            issues.push(format!("pair target {pt:?} does not index the support"));
                            continue;
                        }
                        let cap = p.marginals[pt.i].upper_tail(pt.u).min(p.marginals[pt.j].upper_tail(pt.w));
                        if !t.is_finite() || t > cap + 1e-12 {
                            issues.push(format!("pair target {pt:?} = {t} exceeds the Fréchet cap {cap}"));
                        }
                    }
                }
            }
        }
        AmbiguitySpec::BooleanHigherOrder(b) => {
            if b.p.is_empty() {
                issues.push("no marginals".into());
            }
            for (i, &p) in b.p.iter().enumerate() {
                if !(p > 0.0 && p < 1.0) {
                    issues.push(format!("p[{i}] = {p} outside (0, 1)"));
                }
            }
            if b.m == 0 {
                issues.push("M must be at least 1".into());
            }
            for (set, &q) in &b.q {
                let sorted = set.windows(2).all(|w| w[0] < w[1]);
                if !sorted || set.len() < 2 || set.len() > b.m || set.iter().any(|&i| i >= b.p.len()) {
                    issues.push(format!("target set {set:?} is not a sorted subset of size 2..={}", b.m));
                    continue;
                }
                let cap = set.iter().map(|&i| b.p[i]).fold(f64::INFINITY, f64::min);
                if !q.is_finite() || q > cap + 1e-12 {
                    issues.push(format!("q{set:?} = {q} exceeds the Fréchet cap min(p) = {cap}"));
                }
            }
        }
        AmbiguitySpec::Moment(m) => {
            issues.extend(m.support.issues());
            let n = m.support.n();
            if m.moments.len() != n {
                issues.push(format!("moments given for {} dimensions, support has {n}", m.moments.len()));
            } else if issues.is_empty() {
                for (i, mi) in m.moments.iter().enumerate() {
                    if mi.iter().any(|v| !v.is_finite()) {
                        issues.push(format!("moments of dimension {i} are not finite"));
                    }
                    if let MomentBasis::Tables(t) = &m.basis {
                        if t.len() != n || t[i].len() < mi.len() || t[i].iter().any(|h| h.len() != m.support.dim_len(i)) {
                            issues.push(format!("basis table of dimension {i} has the wrong shape"));
                        }
                    } else if let Some(&m1) = mi.first() {
                        let d = &m.support.dims[i];
                        if m1 < d[0] - 1e-12 || m1 > d[d.len() - 1] + 1e-12 {
                            issues.push(format!("mean of dimension {i} ({m1}) lies outside the support"));
                        }
                    }
                }
            }
            for (&(i, j), &q) in &m.cross {
                if i >= j || j >= n {
                    issues.push(format!("cross moment ({i}, {j}) is not a pair i < j < N"));
                }
                if !q.is_finite() {
                    issues.push(format!("cross moment ({i}, {j}) is not finite"));
                }
            }
        }
    }
    ValidationReport { issues }
}

/// Sparse probability mass function on a product lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    pub support: ProductSupport,
    pub mass: BTreeMap<Vec<usize>, f64>,
}

impl JointDistribution {
    pub fn new(support: ProductSupport, mass: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        let j = JointDistribution { support, mass };
        let issues = j.issues();
        if issues.is_empty() {
            Ok(j)
        } else {
            Err(Error::InvalidSpec(issues))
        }
    }

    pub fn dirac(support: ProductSupport, point: Vec<usize>) -> Result<Self> {
        JointDistribution::new(support, BTreeMap::from([(point, 1.0)]))
    }

    pub fn issues(&self) -> Vec<String> {
        let mut out = self.support.issues();
        for (pt, &p) in &self.mass {
            if !self.support.contains(pt) {
                out.push(format!("point {pt:?} is not on the lattice"));
            }
            if !(p >= 0.0) || !p.is_finite() {
                out.push(format!("point {pt:?} has mass {p}"));
            }
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            out.push(format!("masses sum to {total}"));
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Marginal probabilities of dimension `i`, indexed like the support.
    pub fn marginal_probs(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.support.dim_len(i)];
        for (pt, &p) in &self.mass {
            out[pt[i]] += p;
        }
        out
    }

    pub fn expectation(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.mass.iter().map(|(pt, &p)| p * f(&self.support.values(pt))).sum()
    }
}
