//! WebAssembly bindings for the browser demo in `www/`. Every export takes
//! plain numbers or strings and returns JSON text.

use nalgebra::{DVector, Vector3};
use serde::Serialize;
use wasm_bindgen::prelude::*;

use hybrid_rcg::bench::{performance_profile, run_suite, summarize, GridConfig, Metric, ProfileCurve, SummaryStats};
use hybrid_rcg::manifolds::Sphere;
use hybrid_rcg::problems::{initial_point_rng, InstanceSpec, Objective, ProblemId};
use hybrid_rcg::solver::{BetaRule, ConjugateGradient, SolverConfig};
use hybrid_rcg::{with_objective, Manifold};

/// Longest trace sent to the page; longer runs are thinned.
const MAX_POINTS: usize = 1500;

#[derive(Debug, Serialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub final_cost: f64,
    pub k: Vec<usize>,
    pub f: Vec<f64>,
    pub grad_norm: Vec<f64>,
}

fn thin<T: Copy>(v: &[T]) -> Vec<T> {
    if v.len() <= MAX_POINTS {
        return v.to_vec();
    }
    let stride = v.len().div_ceil(MAX_POINTS);
    let mut out: Vec<T> = v.iter().step_by(stride).copied().collect();
    out.push(*v.last().expect("non-empty"));
    out
}

/// Solve one instance with each rule in `rules`, from the same start.
pub fn solve_traces(problem: &str, small: bool, seed: u64, rules: &[BetaRule]) -> Result<Vec<RunTrace>, String> {
    let id: ProblemId = problem.parse().map_err(|e| format!("{e}"))?;
    let mut spec = InstanceSpec::with_defaults(id, seed);
    spec.params = id.default_params(small);
    let built = spec.build().map_err(|e| e.to_string())?;
    rules
        .iter()
        .map(|&beta| {
            let solver = ConjugateGradient::new(SolverConfig::with_beta(beta)).map_err(|e| e.to_string())?;
            let report = with_objective!(&built, o => {
                let x0 = o.manifold().random_point(&mut initial_point_rng(seed));
                solver.solve(o, x0).map_err(|e| e.to_string())?.report
            });
            let k: Vec<usize> = report.trace.iter().map(|r| r.k).collect();
            let f: Vec<f64> = report.trace.iter().map(|r| r.f).collect();
            let g: Vec<f64> = report.trace.iter().map(|r| r.grad_norm).collect();
            Ok(RunTrace {
                algorithm: beta.label().to_string(),
                converged: report.converged,
                iterations: report.iterations,
                restarts: report.restarts,
                final_cost: report.final_cost,
                k: thin(&k),
                f: thin(&f),
                grad_norm: thin(&g),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ProfileResult {
    pub metric: String,
    pub runs: usize,
    pub unsolved: usize,
    pub curves: Vec<ProfileCurve>,
    pub stats: Vec<SummaryStats>,
}

/// Small-size benchmark grid over `seeds` seeds and its performance profile.
pub fn profile(metric: &str, seeds: u64) -> Result<ProfileResult, String> {
    let metric: Metric = metric.parse()?;
    let grid = GridConfig { seeds: (1..=seeds.max(1)).collect(), ..GridConfig::small() };
    let records = run_suite(&grid, false).map_err(|e| e.to_string())?;
    let curves = performance_profile(&records, metric).map_err(|e| e.to_string())?;
    let stats = summarize(&records, metric).map_err(|e| e.to_string())?;
    Ok(ProfileResult {
        metric: metric.as_str().to_string(),
        runs: records.len(),
        unsolved: records.iter().filter(|r| !r.converged).count(),
        curves,
        stats,
    })
}

#[derive(Debug, Serialize)]
pub struct SphereStep {
    pub x: [f64; 3],
    pub eta: [f64; 3],
    pub y: [f64; 3],
    /// `R_x(t eta)` for `t` in `[0, 1]`.
    pub path: Vec<[f64; 3]>,
    pub xi: [f64; 3],
    pub transported: [f64; 3],
    pub scaled: [f64; 3],
    pub projected: [f64; 3],
    pub scale: f64,
    pub xi_norm: f64,
    pub transported_norm: f64,
}

fn arr(v: &DVector<f64>) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn on_sphere(lon: f64, lat: f64) -> Vector3<f64> {
    Vector3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
}

/// Retraction and transports on the unit sphere in R^3. The point is given
/// by longitude/latitude; `eta` and `xi` are ambient vectors projected onto
/// the tangent plane at that point.
pub fn sphere_step(lon: f64, lat: f64, eta: [f64; 3], xi: [f64; 3]) -> Result<SphereStep, String> {
    let s = Sphere::new(3);
    let x = DVector::from_column_slice(on_sphere(lon, lat).as_slice());
    let eta = s.project(&x, &DVector::from_column_slice(&eta)).map_err(|e| e.to_string())?;
    let xi = s.project(&x, &DVector::from_column_slice(&xi)).map_err(|e| e.to_string())?;
    let y = s.retract(&x, &eta).map_err(|e| e.to_string())?;
    let path = (0..=40)
        .map(|i| s.retract(&x, &(&eta * (i as f64 / 40.0))).map(|p| arr(&p)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let t = s.transport_scaled(&x, &eta, &xi).map_err(|e| e.to_string())?;
    let projected = s.project(&y, &xi).map_err(|e| e.to_string())?;
    Ok(SphereStep {
        x: arr(&x),
        eta: arr(&eta),
        y: arr(&y),
        path,
        xi: arr(&xi),
        transported: arr(&t.unscaled),
        scaled: arr(&t.vector),
        projected: arr(&projected),
        scale: t.scale,
        xi_norm: t.source_norm,
        transported_norm: t.unscaled_norm,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// Traces of DY, PRP, Hybrid1 and Hybrid2 on one instance.
#[wasm_bindgen(js_name = solveTraces)]
pub fn solve_traces_js(problem: &str, small: bool, seed: u32) -> Result<String, JsError> {
    let rules = [BetaRule::Dy, BetaRule::Prp, BetaRule::Hybrid1, BetaRule::Hybrid2];
    to_json(solve_traces(problem, small, seed as u64, &rules))
}

#[wasm_bindgen(js_name = profile)]
pub fn profile_js(metric: &str, seeds: u32) -> Result<String, JsError> {
    to_json(profile(metric, seeds as u64))
}

#[wasm_bindgen(js_name = sphereStep)]
pub fn sphere_step_js(lon: f64, lat: f64, eta: &[f64], xi: &[f64]) -> Result<String, JsError> {
    let three = |v: &[f64]| -> Result<[f64; 3], String> {
        v.try_into().map_err(|_| format!("expected 3 components, got {}", v.len()))
    };
    to_json(three(eta).and_then(|e| three(xi).and_then(|x| sphere_step(lon, lat, e, x))))
}

#[wasm_bindgen(js_name = problemNames)]
pub fn problem_names() -> String {
    let names: Vec<&str> = ProblemId::ALL.iter().map(|p| p.as_str()).collect();
    serde_json::to_string(&names).expect("strings serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traces_start_at_the_same_point() {
        let runs = solve_traces("rayleigh", true, 2, &[BetaRule::Dy, BetaRule::Hybrid1]).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].f[0], runs[1].f[0]);
        assert!(runs.iter().all(|r| r.converged && r.k.len() == r.f.len()));
    }

    #[test]
    fn unknown_problem_is_reported() {
        assert!(solve_traces("nope", true, 1, &[BetaRule::Dy]).unwrap_err().contains("unknown problem"));
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let v: Vec<usize> = (0..5000).collect();
        let t = thin(&v);
        assert!(t.len() <= MAX_POINTS + 1);
        assert_eq!((t[0], *t.last().unwrap()), (0, 4999));
    }

    #[test]
    fn small_profile_has_four_curves() {
        let p = profile("iterations", 1).unwrap();
        assert_eq!(p.runs, 28);
        assert_eq!(p.curves.len(), 4);
        assert!(p.stats.iter().all(|s| s.metric == Metric::Iterations));
    }

    #[test]
    fn sphere_step_stays_on_sphere_and_shrinks() {
        let s = sphere_step(0.3, 0.5, [0.0, 1.5, 0.2], [1.0, -0.4, 0.9]).unwrap();
        let n = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        assert!((n(s.y) - 1.0).abs() < 1e-14);
        assert!(s.path.iter().all(|p| (n(*p) - 1.0).abs() < 1e-14));
        assert!(n(s.scaled) <= s.xi_norm * (1.0 + 1e-12));
        // tangent at y
        let dot = s.y[0] * s.scaled[0] + s.y[1] * s.scaled[1] + s.y[2] * s.scaled[2];
        assert!(dot.abs() < 1e-12);
    }
}
