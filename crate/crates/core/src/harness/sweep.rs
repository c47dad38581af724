use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generators::{gen_concordance_targets, gen_moment_instance, gen_pod_instance, DEFAULT_ALPHA};
use crate::compact::{solve_boolean_higher_order, solve_moment_from};
use crate::error::{Error, Result};
use crate::types::BooleanHigherOrder;

/// Slack allowed before a tighter level counts as a looser bound.
const MONOTONE_TOL: f64 = 1e-7;
/// Regeneration attempts for an instance whose ambiguity set is empty.
const MAX_REGENERATIONS: u64 = 100;

/// One solved level of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Seed that generated the instance (after any regeneration).
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Order `M` for Boolean sweeps, moment degree `L` for moment sweeps.
    #[serde(rename = "M_or_L")]
    pub level: usize,
    pub value: f64,
    /// `100 (f(1) - f(level)) / |f(1)|`; NaN when `f(1) = 0`.
    pub pct_improvement: f64,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug)]
pub struct PodSweepConfig {
    pub first_seed: u64,
    pub instances: usize,
    pub n: usize,
    pub a: f64,
    /// Largest order `M`; clipped to `N`.
    pub max_order: usize,
    pub alpha: Vec<f64>,
}

impl Default for PodSweepConfig {
    fn default() -> Self {
        PodSweepConfig { first_seed: 0, instances: 100, n: 6, a: 0.5, max_order: 6, alpha: DEFAULT_ALPHA.to_vec() }
    }
}

#[derive(Clone, Debug)]
pub struct MomentSweepConfig {
    pub first_seed: u64,
    pub instances: usize,
    pub n: usize,
    pub max_degree: usize,
}

impl Default for MomentSweepConfig {
    fn default() -> Self {
        MomentSweepConfig { first_seed: 0, instances: 100, n: 5, max_degree: 10 }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}

fn pct(base: f64, value: f64) -> f64 {
    if base == 0.0 {
        f64::NAN
    } else {
        100.0 * (base - value) / base.abs()
    }
}

/// Turns per-level values into rows, failing if a tighter level gives a looser bound.
fn rows_for(seed: u64, n: usize, solved: Vec<(f64, f64)>) -> Result<Vec<SweepRow>> {
    let base = solved[0].0;
    for (l, w) in solved.windows(2).enumerate() {
        if w[1].0 > w[0].0 + MONOTONE_TOL * (1.0 + w[0].0.abs()) {
            return Err(Error::Invalid(format!(
                "seed {seed}: bound rose from {} at level {} to {} at level {}",
                w[0].0,
                l + 1,
                w[1].0,
                l + 2
            )));
        }
    }
    Ok(solved
        .into_iter()
        .enumerate()
        .map(|(l, (value, runtime_ms))| SweepRow { seed, n, level: l + 1, value, pct_improvement: pct(base, value), runtime_ms })
        .collect())
}

/// Runs `job` for every seed, spread over the available cores, keeping seed order.
fn parallel<T: Send>(seeds: Vec<u64>, job: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(seeds.len().max(1));
    let chunk = seeds.len().div_ceil(workers).max(1);
    let job = &job;
    let parts: Vec<Result<Vec<T>>> = thread::scope(|s| {
        let handles: Vec<_> =
            seeds.chunks(chunk).map(|c| s.spawn(move || c.iter().map(|&seed| job(seed)).collect::<Result<Vec<T>>>())).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(seeds.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Bounds for orders `M = 1..=max_order` of the higher-order Boolean set with concordance
/// targets. Instances whose set is empty at some order are redrawn from a derived seed.
pub fn run_pod_sweep(cfg: &PodSweepConfig) -> Result<Vec<SweepRow>> {
    let max_order = cfg.max_order.min(cfg.n).max(1);
    let seeds: Vec<u64> = (0..cfg.instances as u64).map(|i| cfg.first_seed + i).collect();
    let per_seed = parallel(seeds, |seed| {
        for attempt in 0..MAX_REGENERATIONS {
            let used = seed.wrapping_add(attempt << 32);
            let inst = gen_pod_instance(used, cfg.n, cfg.a)?;
            let mut solved = Vec::with_capacity(max_order);
            let mut empty = false;
            for m in 1..=max_order {
                let q = gen_concordance_targets(&inst.p, m, &cfg.alpha)?;
                let spec = BooleanHigherOrder { p: inst.p.clone(), m, q };
                match timed(|| solve_boolean_higher_order(&spec, &inst.objective)) {
                    Ok(((r, _), ms)) => solved.push((r.value, ms)),
                    Err(Error::Infeasible(_)) => {
                        empty = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !empty {
                return rows_for(used, cfg.n, solved);
            }
        }
        Err(Error::Infeasible(format!("seed {seed}: no feasible instance after {MAX_REGENERATIONS} draws")))
    })?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Bounds for moment degrees `L = 1..=max_degree` with product cross-moment bounds on all pairs.
pub fn run_moment_sweep(cfg: &MomentSweepConfig) -> Result<Vec<SweepRow>> {
    let seeds: Vec<u64> = (0..cfg.instances as u64).map(|i| cfg.first_seed + i).collect();
    let per_seed = parallel(seeds, |seed| {
        let inst = gen_moment_instance(seed, cfg.n)?;
        // Each degree adds rows to the previous LP, whose optimal basis seeds the next solve.
        let mut basis = None;
        let mut solved = Vec::new();
        for l in 1..=cfg.max_degree.max(1) {
            let ((r, _, b), ms) = timed(|| solve_moment_from(&inst.spec(l), &inst.objective, basis.as_ref()))?;
            solved.push((r.value, ms));
            basis = b;
        }
        rows_for(seed, cfg.n, solved)
    })?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Aggregates over the instances of one sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub instances: usize,
    /// Median of the improvement at the last level, ignoring NaN.
    pub median_final_pct: f64,
    pub mean_final_pct: f64,
    /// Mean of `100 (f(L-1) - f(L)) / |f(1)|` for `L = 2..`, indexed from `L = 2`.
    pub mean_marginal_pct: Vec<f64>,
    /// Fraction of instances whose largest drop happens at level 2.
    pub share_largest_at_two: f64,
    pub total_runtime_ms: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.retain(|x| !x.is_nan());
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let mut groups: Vec<&[SweepRow]> = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i].seed != rows[start].seed || rows[i].level <= rows[i - 1].level {
            groups.push(&rows[start..i]);
            start = i;
        }
    }
    groups.retain(|g| !g.is_empty());
    let finals: Vec<f64> = groups.iter().map(|g| g[g.len() - 1].pct_improvement).collect();
    let depth = groups.iter().map(|g| g.len()).max().unwrap_or(0);
    let mut sums = vec![(0.0, 0usize); depth.saturating_sub(1)];
    let mut at_two = 0usize;
    for g in &groups {
        let base = g[0].value.abs();
        let drops: Vec<f64> = g.windows(2).map(|w| w[0].value - w[1].value).collect();
        if base > 0.0 {
            for (l, d) in drops.iter().enumerate() {
                sums[l].0 += 100.0 * d / base;
                sums[l].1 += 1;
            }
        }
        let best = drops.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !drops.is_empty() && drops[0] >= best {
            at_two += 1;
        }
    }
    let valid: Vec<f64> = finals.iter().copied().filter(|x| !x.is_nan()).collect();
    SweepSummary {
        instances: groups.len(),
        median_final_pct: median(finals),
        mean_final_pct: if valid.is_empty() { f64::NAN } else { valid.iter().sum::<f64>() / valid.len() as f64 },
        mean_marginal_pct: sums.iter().map(|&(s, c)| if c == 0 { f64::NAN } else { s / c as f64 }).collect(),
        share_largest_at_two: if groups.is_empty() { f64::NAN } else { at_two as f64 / groups.len() as f64 },
        total_runtime_ms: rows.iter().map(|r| r.runtime_ms).sum(),
    }
}
