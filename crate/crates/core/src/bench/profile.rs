//! Dolan–Moré performance profiles.
//!
//! For costs `t[p][s]`, the ratio is `r[p][s] = t[p][s] / min_s t[p][s]` and
//! `P_s(tau)` is the fraction of problems with `r[p][s] <= tau`. Unsolved
//! cells have `r = +inf`. A problem no solver solved has no reference cost
//! and is dropped.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BenchError, Metric, RunRecord};
use crate::problems::ProblemId;
use crate::solver::BetaRule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub algorithm: String,
    /// Breakpoints `(tau, P(tau))`, strictly increasing in `tau`.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Step-function value: `P(tau)` for any `tau`.
    pub fn value_at(&self, tau: f64) -> f64 {
        self.points.iter().take_while(|(t, _)| *t <= tau).last().map_or(0.0, |&(_, p)| p)
    }

    /// Largest value attained, the fraction of problems solved.
    pub fn solved_fraction(&self) -> f64 {
        self.points.last().map_or(0.0, |&(_, p)| p)
    }
}

/// Cost table: one row per problem, one column per solver, `None` when unsolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub solvers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

fn ratio(t: f64, best: f64) -> f64 {
    if best > 0.0 {
        t / best
    } else if t == best {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Profiles from a cost table, plus the number of rows dropped because no
/// solver solved them.
pub fn profile_from_table(table: &ProfileTable) -> (Vec<ProfileCurve>, usize) {
    let ns = table.solvers.len();
    let mut ratios: Vec<Vec<f64>> = vec![Vec::new(); ns];
    let mut dropped = 0;
    for row in &table.rows {
        assert_eq!(row.len(), ns, "profile table rows must have one cell per solver");
        let best = row.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            dropped += 1;
            continue;
        }
        for (s, cell) in row.iter().enumerate() {
            ratios[s].push(cell.map_or(f64::INFINITY, |t| ratio(t, best)));
        }
    }
    let np = table.rows.len() - dropped;
    let curves = table
        .solvers
        .iter()
        .zip(ratios)
        .map(|(name, mut r)| {
            r.sort_by(f64::total_cmp);
            let mut points: Vec<(f64, f64)> = Vec::new();
            for (i, &tau) in r.iter().enumerate() {
                if !tau.is_finite() {
                    break;
                }
                let p = (i + 1) as f64 / np as f64;
                match points.last_mut() {
                    Some(last) if last.0 == tau => last.1 = p,
                    _ => points.push((tau, p)),
                }
            }
            ProfileCurve { algorithm: name.clone(), points }
        })
        .collect();
    (curves, dropped)
}

/// Profiles over benchmark records, treating each `(problem, seed)` as one
/// problem. Non-converged runs count as unsolved.
pub fn performance_profile(records: &[RunRecord], metric: Metric) -> Result<Vec<ProfileCurve>, BenchError> {
    let mut algorithms: Vec<BetaRule> = Vec::new();
    let mut cells: BTreeMap<(ProblemId, u64), BTreeMap<BetaRule, Option<f64>>> = BTreeMap::new();
    for r in records {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
        let v = r.converged.then(|| metric.value(r));
        cells.entry((r.problem, r.seed)).or_default().insert(r.algorithm, v);
    }
    let mut rows = Vec::with_capacity(cells.len());
    for ((problem, seed), row) in &cells {
        let mut out = Vec::with_capacity(algorithms.len());
        for alg in &algorithms {
            match row.get(alg) {
                Some(v) => out.push(*v),
                None => return Err(BenchError::MissingCell(format!("{problem} seed {seed} {alg}"))),
            }
        }
        rows.push(out);
    }
    let table = ProfileTable { solvers: algorithms.iter().map(|a| a.label().to_string()).collect(), rows };
    let (curves, dropped) = profile_from_table(&table);
    if dropped > 0 {
        log::warn!("{dropped} instance(s) solved by no algorithm were left out of the {metric} profile");
    }
    Ok(curves)
}
