//! Small integer LPs solved exactly by vertex enumeration over the rationals.
//!
//! Every variable has at least one finite bound, so the feasible region and its recession
//! cone are pointed: a nonempty region has a vertex, and an improving ray exists iff the
//! cone sliced by `c'd = 1` has a vertex.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use sharpbound_lp::{LpModel, RowSense, Sense};

type Q = BigRational;

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

#[derive(Clone, Debug)]
pub struct IntLp {
    pub sense: Sense,
    pub obj: Vec<i64>,
    pub bounds: Vec<(Option<i64>, Option<i64>)>,
    pub rows: Vec<(Vec<i64>, RowSense, i64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Exact {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

impl IntLp {
    pub fn random(rng: &mut impl Rng, max_vars: usize, max_rows: usize) -> IntLp {
        let n = rng.random_range(1..=max_vars);
        let m = rng.random_range(0..=max_rows);
        let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
        let obj = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        let bounds = (0..n)
            .map(|_| match rng.random_range(0..3) {
                0 => (Some(rng.random_range(-2..=1)), None),
                1 => (Some(rng.random_range(-2..=0)), Some(rng.random_range(1..=4))),
                _ => (None, Some(rng.random_range(-1..=3))),
            })
            .collect();
        let rows = (0..m)
            .map(|_| {
                let a = (0..n).map(|_| if rng.random_bool(0.7) { rng.random_range(-3..=3) } else { 0 }).collect();
                let sense = match rng.random_range(0..5) {
                    0 | 1 => RowSense::Le,
                    2 | 3 => RowSense::Ge,
                    _ => RowSense::Eq,
                };
                (a, sense, rng.random_range(-4..=6))
            })
            .collect();
        IntLp { sense, obj, bounds, rows }
    }

    pub fn n(&self) -> usize {
        self.obj.len()
    }

    pub fn model(&self) -> LpModel {
        let mut m = LpModel::new(self.sense);
        let vars: Vec<_> = self
            .obj
            .iter()
            .zip(&self.bounds)
            .map(|(&c, &(l, u))| m.add_var(c as f64, l.map_or(f64::NEG_INFINITY, |v| v as f64), u.map_or(f64::INFINITY, |v| v as f64)))
            .collect();
        for (a, s, b) in &self.rows {
            m.add_row(vars.iter().zip(a).map(|(&v, &c)| (v, c as f64)), *s, *b as f64);
        }
        m
    }

    pub fn solve_exact(&self) -> Exact {
        let n = self.n();
        let verts = vertices(n, &self.constraints(false), None);
        if verts.is_empty() {
            return Exact::Infeasible;
        }
        let dir = if self.sense == Sense::Maximize { 1 } else { -1 };
        let norm = Con { a: self.obj.iter().map(|&c| q(c * dir)).collect(), b: Q::one(), eq: true };
        if !vertices(n, &self.constraints(true), Some(&norm)).is_empty() {
            return Exact::Unbounded;
        }
        let value = |x: &Vec<Q>| -> Q { self.obj.iter().zip(x).map(|(&c, v)| q(c) * v).sum() };
        let best = verts.iter().map(value).reduce(|a, b| if (dir == 1) == (b > a) { b } else { a }).expect("vertices exist");
        Exact::Optimal(best.to_f64().expect("finite optimum"))
    }

    /// Rows and bounds as `a'x <= b` or `a'x = b`; the homogeneous version describes the
    /// recession cone.
    fn constraints(&self, homogeneous: bool) -> Vec<Con> {
        let n = self.n();
        let rhs = |v: i64| if homogeneous { Q::zero() } else { q(v) };
        let mut out = Vec::new();
        for (a, s, b) in &self.rows {
            let a: Vec<Q> = a.iter().map(|&v| q(v)).collect();
            match s {
                RowSense::Le => out.push(Con { a, b: rhs(*b), eq: false }),
                RowSense::Ge => out.push(Con { a: a.iter().map(|v| -v).collect(), b: -rhs(*b), eq: false }),
                RowSense::Eq => out.push(Con { a, b: rhs(*b), eq: true }),
            }
        }
        for (j, (l, u)) in self.bounds.iter().enumerate() {
            let unit = |s: i64| (0..n).map(|k| if k == j { q(s) } else { Q::zero() }).collect::<Vec<_>>();
            if let Some(l) = l {
                out.push(Con { a: unit(-1), b: -rhs(*l), eq: false });
            }
            if let Some(u) = u {
                out.push(Con { a: unit(1), b: rhs(*u), eq: false });
            }
        }
        out
    }
}

struct Con {
    a: Vec<Q>,
    b: Q,
    eq: bool,
}

fn solve_square(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for k in col..n {
                    let t = &f * &a[col][k];
                    a[r][k] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn vertices(n: usize, cons: &[Con], extra: Option<&Con>) -> Vec<Vec<Q>> {
    let all: Vec<&Con> = cons.iter().chain(extra).collect();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(n);
    choose(&all, n, 0, &mut pick, &mut out);
    out
}

fn choose(all: &[&Con], n: usize, start: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<Q>>) {
    if pick.len() == n {
        let a = pick.iter().map(|&i| all[i].a.clone()).collect();
        let b = pick.iter().map(|&i| all[i].b.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            let feasible = all.iter().all(|c| {
                let act: Q = c.a.iter().zip(&x).map(|(a, v)| a * v).sum();
                if c.eq {
                    act == c.b
                } else {
                    act <= c.b
                }
            });
            if feasible {
                out.push(x);
            }
        }
        return;
    }
    for i in start..all.len() {
        pick.push(i);
        choose(all, n, i + 1, pick, out);
        pick.pop();
    }
}
