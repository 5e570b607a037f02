//! Command-line front end.
//!
//! Exit codes: 0 success (for `solve`: converged), 2 `solve` did not
//! converge or a `check` suite failed, 1 usage or configuration error,
//! 3 I/O or runtime failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybrid_rcg::bench::{
    self, performance_profile, profile_csv, profile_svg, records_csv, stats_csv, summarize, write_atomic, GridConfig,
    Metric, RunRecord, SvgOptions,
};
use hybrid_rcg::checks::{self, CheckOptions, Suite};
use hybrid_rcg::linesearch::LineSearchConfig;
use hybrid_rcg::problems::{initial_point_rng, InstanceSpec, Objective, Params, ProblemId};
use hybrid_rcg::solver::{BetaRule, ConjugateGradient, SolverConfig, Termination};
use hybrid_rcg::{with_objective, Manifold};

/// Overrides the output directory of `bench` and `profile`.
const OUT_DIR_ENV: &str = "HYBRID_RCG_OUT_DIR";

#[derive(Parser)]
#[command(name = "hybrid-rcg", version, about = "Riemannian conjugate gradient with hybrid beta rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark instance.
    Solve(SolveArgs),
    /// Run the benchmark grid and write records, statistics and profiles.
    Bench(BenchArgs),
    /// Recompute statistics and profiles from a records CSV.
    Profile(ProfileArgs),
    /// Run the built-in property suites.
    Check(CheckArgs),
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    problem: ProblemId,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    num_mats: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long)]
    fill_prob: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Start from the reduced benchmark sizes.
    #[arg(long)]
    small: bool,
}

impl ProblemArgs {
    fn spec(&self) -> InstanceSpec {
        let mut params: Params = self.problem.default_params(self.small);
        let sizes = [("n", self.n), ("m", self.m), ("p", self.p), ("k", self.k), ("num_mats", self.num_mats)];
        for (key, v) in sizes {
            if let Some(v) = v {
                params.insert(key.into(), v.into());
            }
        }
        for (key, v) in [("edge_prob", self.edge_prob), ("fill_prob", self.fill_prob)] {
            if let Some(v) = v {
                params.insert(key.into(), v.into());
            }
        }
        InstanceSpec::new(self.problem, params, self.seed)
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-4)]
    c1: f64,
    #[arg(long, default_value_t = 0.9)]
    c2: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "hybrid1")]
    beta: BetaRule,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write the full report as JSON.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid description (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Restrict statistics and profiles to one metric (default: both).
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    small: bool,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Run solves on all cores. Timings are then not comparable.
    #[arg(long)]
    parallel: bool,
    /// Plot profiles on a log2 tau axis.
    #[arg(long)]
    log_tau: bool,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    log_tau: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Run only this suite (geometry, gradients, beta, linesearch).
    #[arg(long)]
    suite: Option<Suite>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Debug hook: perturb every gradient so the gradient suite fails.
    #[arg(long, hide = true)]
    corrupt_gradient: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

const USAGE: u8 = 1;
const NOT_CONVERGED: u8 = 2;
const CHECK_FAILED: u8 = 2;
const RUNTIME: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Profile(a) => profile(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(RUNTIME)
        }
    }
}

fn solver_config(beta: BetaRule, a: &SolverArgs) -> Result<SolverConfig, Failure> {
    let config = SolverConfig {
        beta,
        tolerance: a.tol,
        max_iters: a.max_iters,
        line_search: LineSearchConfig { c1: a.c1, c2: a.c2, ..Default::default() },
        ..Default::default()
    };
    ConjugateGradient::new(config).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn write(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    write_atomic(path, contents).map_err(|e| Failure::Runtime(e.to_string()))
}

fn solve(a: SolveArgs) -> Result<u8, Failure> {
    let config = solver_config(a.beta, &a.solver)?;
    let spec = a.problem.spec();
    let problem = spec.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let solver = ConjugateGradient::new(config).map_err(|e| Failure::Usage(e.to_string()))?;
    let solution = with_objective!(&problem, obj => {
        let x0 = obj.manifold().random_point(&mut initial_point_rng(spec.seed));
        solver.solve(obj, x0).map(|s| s.report)
    });
    let report = solution.map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("problem     {} ({})", spec.problem, problem.manifold_name());
    println!("beta        {}", report.beta);
    println!("f           {:.12e}", report.final_cost);
    println!("grad_norm   {:.6e}", report.final_grad_norm);
    println!("iterations  {}", report.iterations);
    println!("restarts    {}", report.restarts);
    println!("converged   {}", report.converged);
    if let Termination::Aborted { reason } = &report.termination {
        println!("aborted     {reason}");
    }
    if let Some(path) = &a.trace_out {
        let mut buf = Vec::new();
        report.write_trace_csv(&mut buf).map_err(|e| Failure::Runtime(e.to_string()))?;
        write(path, &buf)?;
    }
    if let Some(path) = &a.report_out {
        let json = serde_json::to_vec_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
        write(path, &json)?;
    }
    Ok(if report.converged { 0 } else { NOT_CONVERGED })
}

fn out_dir(flag: &Path) -> Result<PathBuf, Failure> {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| flag.to_path_buf());
    match fs::create_dir(&dir) {
        Ok(()) => Ok(dir),
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists && dir.is_dir() => Ok(dir),
        Err(e) => Err(Failure::Runtime(format!("{}: {e}", dir.display()))),
    }
}

fn load_grid(path: Option<&Path>) -> Result<GridConfig, Failure> {
    let Some(path) = path else {
        return Ok(GridConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit_reports(records: &[RunRecord], dir: &Path, metric: Option<Metric>, log_tau: bool) -> Result<(), Failure> {
    let metrics = match metric {
        Some(m) => vec![m],
        None => vec![Metric::Iterations, Metric::Time],
    };
    let mut stats = Vec::new();
    for &m in &metrics {
        match summarize(records, m) {
            Ok(s) => stats.extend(s),
            Err(bench::BenchError::Empty) => {}
            Err(e) => return Err(Failure::Runtime(e.to_string())),
        }
    }
    write(&dir.join("stats.csv"), stats_csv(&stats).as_bytes())?;
    for &m in &metrics {
        let curves = performance_profile(records, m).map_err(|e| Failure::Runtime(e.to_string()))?;
        write(&dir.join(format!("profile_{m}.csv")), profile_csv(&curves).as_bytes())?;
        let title = match m {
            Metric::Iterations => "Performance profile: iterations",
            Metric::Time => "Performance profile: elapsed time",
        };
        let svg = profile_svg(&curves, &SvgOptions { log_tau, title: title.into(), ..Default::default() });
        write(&dir.join(format!("profile_{m}.svg")), svg.as_bytes())?;
    }
    for s in &stats {
        println!(
            "{:<9} {:<10} mean {:>12.4} std {:>12.4} min {:>10.4} median {:>10.4} max {:>10.4}",
            s.algorithm.label(),
            s.metric,
            s.mean,
            s.std,
            s.min,
            s.median,
            s.max
        );
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<u8, Failure> {
    let mut grid = load_grid(a.config.as_deref())?;
    grid.small |= a.small;
    if let Some(v) = a.c1 {
        grid.c1 = v;
    }
    if let Some(v) = a.c2 {
        grid.c2 = v;
    }
    if let Some(v) = a.tol {
        grid.tol = v;
    }
    if let Some(v) = a.max_iters {
        grid.max_iters = v;
    }
    for alg in &grid.algorithms {
        ConjugateGradient::new(grid.solver_config(*alg)).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    for spec in grid.instances() {
        spec.build().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let dir = out_dir(&a.out_dir)?;
    eprintln!("running {} solves", grid.run_count());
    let records = bench::run_suite(&grid, a.parallel).map_err(|e| Failure::Runtime(e.to_string()))?;
    write(&dir.join("records.csv"), records_csv(&records).as_bytes())?;
    emit_reports(&records, &dir, a.metric, a.log_tau)?;
    let failed = records.iter().filter(|r| !r.converged).count();
    println!("{} runs, {} not converged, output in {}", records.len(), failed, dir.display());
    Ok(0)
}

fn profile(a: ProfileArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&a.records).map_err(|e| Failure::Usage(format!("{}: {e}", a.records.display())))?;
    let records = bench::parse_records_csv(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.records.display())))?;
    let dir = out_dir(&a.out_dir)?;
    emit_reports(&records, &dir, a.metric, a.log_tau)?;
    Ok(0)
}

fn check(a: CheckArgs) -> Result<u8, Failure> {
    let opts = CheckOptions { trials: a.trials, seed: a.seed, corrupt_gradient: a.corrupt_gradient };
    let suites = match a.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let mut ok = true;
    for s in suites {
        let r = checks::run(s, &opts);
        println!("{r}");
        ok &= r.passed();
    }
    Ok(if ok { 0 } else { CHECK_FAILED })
}
