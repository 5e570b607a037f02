//! Experiment grid, summary statistics and performance profiles.

mod output;
mod profile;
mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use web_time::Instant;

use crate::geometry::Manifold;
use crate::linesearch::LineSearchConfig;
use crate::problems::{initial_point_rng, InstanceSpec, Objective, Params, ProblemError, ProblemId};
use crate::solver::{BetaRule, ConjugateGradient, SolverConfig, SolverError};
use crate::with_objective;

pub use output::{
    parse_profile_csv, parse_records_csv, parse_stats_csv, profile_csv, records_csv, stats_csv, write_atomic,
    PROFILE_CSV_HEADER, RECORDS_CSV_HEADER, STATS_CSV_HEADER,
};
pub use profile::{performance_profile, profile_from_table, ProfileCurve, ProfileTable};
pub use svg::{profile_svg, SvgOptions};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot summarize an empty set of records")]
    Empty,
    #[error("performance profile needs every (instance, algorithm) cell; missing {0}")]
    MissingCell(String),
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Iterations,
    Time,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Iterations => "iterations",
            Metric::Time => "time",
        }
    }

    pub fn value(self, record: &RunRecord) -> f64 {
        match self {
            Metric::Iterations => record.iterations as f64,
            Metric::Time => record.elapsed_s,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterations" => Ok(Metric::Iterations),
            "time" => Ok(Metric::Time),
            _ => Err(format!("unknown metric `{s}` (expected iterations or time)")),
        }
    }
}

/// One solve in the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: ProblemId,
    pub seed: u64,
    pub algorithm: BetaRule,
    pub converged: bool,
    pub iterations: usize,
    pub elapsed_s: f64,
    pub final_grad_norm: f64,
    pub restarts: usize,
}

impl RunRecord {
    fn sort_key(&self) -> (ProblemId, u64, usize) {
        let alg = BetaRule::ALL.iter().position(|b| *b == self.algorithm).unwrap_or(usize::MAX);
        (self.problem, self.seed, alg)
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by_key(RunRecord::sort_key);
}

fn default_problems() -> Vec<ProblemId> {
    ProblemId::ALL.to_vec()
}

fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}

fn default_algorithms() -> Vec<BetaRule> {
    vec![BetaRule::Dy, BetaRule::Prp, BetaRule::Hybrid1, BetaRule::Hybrid2]
}

fn default_c1() -> f64 {
    1e-4
}

fn default_c2() -> f64 {
    0.9
}

fn default_tol() -> f64 {
    1e-6
}

fn default_max_iters() -> usize {
    10_000
}

/// Experiment grid, loadable from JSON. Every field is optional:
///
/// ```json
/// {"problems": ["rayleigh"], "seeds": [1, 2], "algorithms": ["dy", "hybrid1"],
///  "small": false, "params": {"rayleigh": {"n": 30}}, "max_iters": 5000}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_problems")]
    pub problems: Vec<ProblemId>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<BetaRule>,
    /// Reduced sizes for quick runs.
    #[serde(default)]
    pub small: bool,
    /// Per-problem parameter overrides on top of the grid's sizes.
    #[serde(default)]
    pub params: BTreeMap<ProblemId, Params>,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default = "default_c2")]
    pub c2: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl GridConfig {
    pub fn small() -> Self {
        Self { small: true, ..Self::default() }
    }

    pub fn instances(&self) -> Vec<InstanceSpec> {
        let mut out = Vec::with_capacity(self.problems.len() * self.seeds.len());
        for &problem in &self.problems {
            let mut params = problem.default_params(self.small);
            if let Some(extra) = self.params.get(&problem) {
                params.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
            for &seed in &self.seeds {
                out.push(InstanceSpec::new(problem, params.clone(), seed));
            }
        }
        out
    }

    pub fn solver_config(&self, beta: BetaRule) -> SolverConfig {
        SolverConfig {
            beta,
            tolerance: self.tol,
            max_iters: self.max_iters,
            line_search: LineSearchConfig { c1: self.c1, c2: self.c2, ..Default::default() },
            ..Default::default()
        }
    }

    pub fn run_count(&self) -> usize {
        self.problems.len() * self.seeds.len() * self.algorithms.len()
    }
}

/// Solve one instance from its seeded initial point. Only the solve itself
/// is timed. A solver abort is reported as a non-converged record.
pub fn run_one(spec: &InstanceSpec, config: &SolverConfig) -> Result<RunRecord, BenchError> {
    let problem = spec.build()?;
    let solver = ConjugateGradient::new(*config)?;
    let (report, elapsed) = with_objective!(&problem, obj => {
        let x0 = obj.manifold().random_point(&mut initial_point_rng(spec.seed));
        let start = Instant::now();
        let sol = solver.solve(obj, x0)?;
        (sol.report, start.elapsed().as_secs_f64())
    });
    Ok(RunRecord {
        problem: spec.problem,
        seed: spec.seed,
        algorithm: config.beta,
        converged: report.converged,
        iterations: report.iterations,
        elapsed_s: elapsed,
        final_grad_norm: report.final_grad_norm,
        restarts: report.restarts,
    })
}

/// Run every (instance, algorithm) pair. With `parallel`, runs fan out over
/// a thread pool (timings are then not comparable). Records are returned
/// sorted by problem, seed and algorithm.
pub fn run_suite(grid: &GridConfig, parallel: bool) -> Result<Vec<RunRecord>, BenchError> {
    let jobs: Vec<(InstanceSpec, SolverConfig)> = grid
        .instances()
        .into_iter()
        .flat_map(|spec| grid.algorithms.iter().map(move |&b| (spec.clone(), b)))
        .map(|(spec, b)| (spec, grid.solver_config(b)))
        .collect();
    let run = |(spec, cfg): &(InstanceSpec, SolverConfig)| {
        let rec = run_one(spec, cfg);
        if let Ok(r) = &rec {
            log::info!(
                "{} seed {} {}: {} iterations, converged = {}",
                r.problem,
                r.seed,
                r.algorithm,
                r.iterations,
                r.converged
            );
        }
        rec
    };
    let mut records = if parallel { run_parallel(&jobs, run)? } else { jobs.iter().map(run).collect::<Result<Vec<_>, _>>()? };
    sort_records(&mut records);
    Ok(records)
}

#[cfg(feature = "parallel")]
fn run_parallel<F>(jobs: &[(InstanceSpec, SolverConfig)], run: F) -> Result<Vec<RunRecord>, BenchError>
where
    F: Fn(&(InstanceSpec, SolverConfig)) -> Result<RunRecord, BenchError> + Send + Sync,
{
    use rayon::prelude::*;
    jobs.par_iter().map(run).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<F>(jobs: &[(InstanceSpec, SolverConfig)], run: F) -> Result<Vec<RunRecord>, BenchError>
where
    F: Fn(&(InstanceSpec, SolverConfig)) -> Result<RunRecord, BenchError>,
{
    jobs.iter().map(run).collect()
}

/// Per-algorithm summary of one metric. `std` is the sample standard
/// deviation (divisor `n - 1`), defined as 0 for a single value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub algorithm: BetaRule,
    pub metric: Metric,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

pub fn describe(values: &[f64]) -> Option<(f64, f64, f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
    Some((mean, std, sorted[0], median, sorted[sorted.len() - 1]))
}

/// Summary per algorithm, in order of first appearance.
pub fn summarize(records: &[RunRecord], metric: Metric) -> Result<Vec<SummaryStats>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut order = Vec::new();
    let mut groups: BTreeMap<BetaRule, Vec<f64>> = BTreeMap::new();
    for r in records {
        if !groups.contains_key(&r.algorithm) {
            order.push(r.algorithm);
        }
        groups.entry(r.algorithm).or_default().push(metric.value(r));
    }
    Ok(order
        .into_iter()
        .map(|alg| {
            let v = &groups[&alg];
            let (mean, std, min, median, max) = describe(v).expect("non-empty group");
            SummaryStats { algorithm: alg, metric, count: v.len(), mean, std, min, median, max }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn describe_small_sets() {
        assert_eq!(describe(&[3.0, 1.0, 2.0]), Some((2.0, 1.0, 1.0, 2.0, 3.0)));
        assert_eq!(describe(&[5.0]), Some((5.0, 0.0, 5.0, 5.0, 5.0)));
        assert_eq!(describe(&[1.0, 2.0, 3.0, 10.0]).unwrap().3, 2.5);
        assert_eq!(describe(&[]), None);
    }

    #[test]
    fn summarize_rejects_empty() {
        assert!(matches!(summarize(&[], Metric::Iterations), Err(BenchError::Empty)));
    }

    #[test]
    fn default_grid_has_280_runs() {
        let grid = GridConfig::default();
        assert_eq!(grid.instances().len(), 70);
        assert_eq!(grid.run_count(), 280);
    }

    #[test]
    fn grid_json_rejects_unknown_keys() {
        let err = serde_json::from_str::<GridConfig>(r#"{"seeds": [1], "sedes": [2]}"#).unwrap_err();
        assert!(err.to_string().contains("sedes"));
    }

    #[test]
    fn grid_params_override_sizes() {
        let grid: GridConfig =
            serde_json::from_str(r#"{"problems": ["rayleigh"], "seeds": [3], "params": {"rayleigh": {"n": 7}}}"#).unwrap();
        let specs = grid.instances();
        assert_eq!(specs.len(), 1);
        assert_eq!(specs[0].params["n"], serde_json::json!(7));
    }

    #[test]
    fn empty_grid_gives_no_records() {
        let grid = GridConfig { problems: vec![], ..Default::default() };
        assert!(run_suite(&grid, false).unwrap().is_empty());
    }

    #[test]
    fn steepest_run_on_small_rayleigh() {
        let mut params = Params::new();
        params.insert("n".into(), 4.into());
        let spec = InstanceSpec::new(ProblemId::Rayleigh, params, 1);
        let rec = run_one(&spec, &SolverConfig::with_beta(BetaRule::Steepest)).unwrap();
        assert!(rec.converged);
        assert_eq!(rec.algorithm, BetaRule::Steepest);
        assert!(rec.final_grad_norm < 1e-6);
        assert!(rec.elapsed_s >= 0.0);
    }
}
